#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "prefrec/experiment.hpp"
#include "prefrec/plots.hpp"

namespace {

void apply_shared_train_flags(prefrec::TrainConfig& tc, const prefrec::TrainConfig& src) {
  tc.lr = src.lr;
  tc.batch_size = src.batch_size;
  tc.weight_decay = src.weight_decay;
  tc.margin = src.margin;
  tc.lr_patience = src.lr_patience;
  tc.lr_factor = src.lr_factor;
  tc.early_stop_patience = src.early_stop_patience;
  tc.validation_fraction = src.validation_fraction;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Preference-ranking laboratory for headline recommendation: supervised seed sweeps, "
      "day-stepped serving simulations with delayed feedback, synthetic corpus generation, "
      "and figure emission."};

  std::string mode_str;
  app.add_option("--mode", mode_str, "supervised | online | synth-gen | plot")->required();

  std::string corpus_path;
  app.add_option("--corpus", corpus_path, "corpus file (JSONL); omit to use the synthetic generator");
  auto* synth_flag = app.add_flag("--synthetic", "use the synthetic corpus (conflicts with --corpus)");

  prefrec::ExperimentConfig cfg;
  auto* o_heads = app.add_option("--synth-headlines", cfg.synthetic.n_headlines, "synthetic corpus size");
  auto* o_days = app.add_option("--synth-days", cfg.synthetic.n_days, "synthetic calendar span in days");
  auto* o_dim = app.add_option("--synth-dim", cfg.synthetic.dim, "synthetic embedding dimension");
  auto* o_noise = app.add_option("--synth-noise", cfg.synthetic.noise_scale,
                                 "log-space click noise scale (0 = noiseless)");
  auto* o_alpha = app.add_option("--synth-alpha", cfg.synthetic.pareto_alpha,
                                 "click tail exponent above the last rank bound");
  auto* o_latent = app.add_option("--synth-latent-seed", cfg.synthetic.latent_weight_seed,
                                  "seed of the hidden preference direction");
  app.add_option("--data-seed", cfg.data_seed, "seed for synthetic corpus sampling")
      ->capture_default_str();

  std::string seeds_str = "0..19";
  app.add_option("--seeds", seeds_str, "replicate seeds, e.g. \"0..99\" or \"3,7,11\"")
      ->capture_default_str();
  std::string policies_str = "greedy,neural-ts,oracle-best,oracle-second,random";
  app.add_option("--policies", policies_str, "comma list for online mode")->capture_default_str();

  app.add_option("--out", cfg.out_dir, "output directory (env PREFREC_OUT_ROOT overrides the default)")
      ->envname("PREFREC_OUT_ROOT")
      ->capture_default_str();
  app.add_option("--workers", cfg.workers, "parallel replicate workers")->capture_default_str();
  app.add_flag("--plot", cfg.emit_plots_after, "emit figures after an online run");

  app.add_option("--split-fraction", cfg.split_fraction, "chronological train share of the corpus")
      ->capture_default_str();
  app.add_option("--pairs-per-rank", cfg.pairing_M, "pair samples per superior rank")
      ->capture_default_str();

  app.add_option("--hidden", cfg.net.hidden, "hidden width of the scorer")->capture_default_str();
  app.add_option("--blocks", cfg.net.blocks, "residual blocks in the scorer")->capture_default_str();

  prefrec::TrainConfig shared = cfg.train;
  app.add_option("--lr", shared.lr, "initial learning rate")->capture_default_str();
  app.add_option("--batch-size", shared.batch_size, "pairs per training batch")->capture_default_str();
  app.add_option("--weight-decay", shared.weight_decay, "decoupled weight decay")
      ->capture_default_str();
  app.add_option("--margin", shared.margin, "ranking margin")->capture_default_str();
  app.add_option("--lr-patience", shared.lr_patience, "epochs without improvement before lr decay")
      ->capture_default_str();
  app.add_option("--lr-factor", shared.lr_factor, "lr decay factor")->capture_default_str();
  app.add_option("--early-stop-patience", shared.early_stop_patience,
                 "epochs without improvement before stopping")
      ->capture_default_str();
  app.add_option("--val-fraction", shared.validation_fraction,
                 "validation share of the training pairs")
      ->capture_default_str();
  app.add_option("--max-epochs", cfg.train.max_epochs,
                 "epoch cap for supervised training (and the history-sized baseline)")
      ->capture_default_str();

  app.add_option("--warmup-days", cfg.sim.warmup_window_days, "length of the warm-up window")
      ->capture_default_str();
  app.add_option("--warmup-samples", cfg.sim.warmup_sample_size, "headlines sampled for warm-up")
      ->capture_default_str();
  app.add_option("--delay", cfg.sim.feedback_delay_days, "feedback delay in days")
      ->capture_default_str();
  app.add_option("--initial-epochs", cfg.sim.initial_train.max_epochs,
                 "epoch cap for the warm-up model")
      ->capture_default_str();
  app.add_option("--retrain-epochs", cfg.sim.retrain.max_epochs, "epoch cap per daily retrain")
      ->capture_default_str();
  app.add_option("--nts-nu", cfg.sim.nts_nu, "posterior width of the sampling policy")
      ->capture_default_str();
  app.add_option("--nts-lambda", cfg.sim.nts_lambda, "prior precision of the sampling policy")
      ->capture_default_str();
  int eval_cutoff = 0;
  auto* o_cutoff =
      app.add_option("--eval-cutoff", eval_cutoff, "last day of the accuracy-over-time series");
  bool cold_start = false;
  app.add_flag("--cold-start", cold_start, "re-initialize the model on every retrain");
  app.add_option("--min-val-pairs", cfg.sim.min_pairs_for_validation,
                 "history pairs required before a validation split is carved out")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.mode = prefrec::parse_mode(mode_str);
    cfg.corpus_path = corpus_path;
    cfg.synthetic_requested = synth_flag->count() > 0 || o_heads->count() > 0 ||
                              o_days->count() > 0 || o_dim->count() > 0 || o_noise->count() > 0 ||
                              o_alpha->count() > 0 || o_latent->count() > 0;
    cfg.seeds = prefrec::parse_seed_list(seeds_str);
    cfg.policies = prefrec::parse_policy_list(policies_str);
    if (o_cutoff->count() > 0) cfg.sim.eval_cutoff_day = eval_cutoff;
    if (cold_start) cfg.sim.warm_start = false;

    apply_shared_train_flags(cfg.train, shared);
    apply_shared_train_flags(cfg.sim.initial_train, shared);
    apply_shared_train_flags(cfg.sim.retrain, shared);
    cfg.sim.net = cfg.net;
    cfg.sim.pairing_M = cfg.pairing_M;
    cfg.sim.rank_bounds = cfg.rank_bounds;

    switch (cfg.mode) {
      case prefrec::Mode::SynthGen: {
        const std::string path = prefrec::run_synth_gen(cfg);
        std::cout << "wrote " << path << " (" << cfg.synthetic.n_headlines << " headlines, dim "
                  << cfg.synthetic.dim << ", " << cfg.synthetic.n_days << " days)\n";
        break;
      }
      case prefrec::Mode::Supervised: {
        const prefrec::Corpus corpus = prefrec::resolve_corpus(cfg);
        std::cout << "corpus: " << corpus.size() << " headlines, dim " << corpus.dim() << "\n";
        const prefrec::SupervisedSummary s = prefrec::run_supervised(corpus, cfg, &std::cout);
        std::cout << "accuracy: mean " << prefrec::fmt_double(s.accuracy_mean) << ", sample std "
                  << prefrec::fmt_double(s.accuracy_std) << " over " << s.per_seed.size()
                  << " seeds\n";
        std::cout << "weighted accuracy: mean " << prefrec::fmt_double(s.weighted_accuracy_mean)
                  << ", sample std " << prefrec::fmt_double(s.weighted_accuracy_std) << "\n";
        std::cout << "wrote " << s.per_seed_csv << " and " << s.aggregate_csv << "\n";
        break;
      }
      case prefrec::Mode::Online: {
        const prefrec::Corpus corpus = prefrec::resolve_corpus(cfg);
        std::cout << "corpus: " << corpus.size() << " headlines, dim " << corpus.dim() << "\n";
        const prefrec::OnlineSummary s = prefrec::run_online(corpus, cfg, &std::cout);
        std::cout << "serving days: " << s.serving_days << "\n";
        for (const prefrec::OnlinePolicyAggregate& a : s.aggregates) {
          std::cout << to_string(a.policy) << ": total clicks "
                    << prefrec::fmt_double(a.total_clicks_mean) << " (std "
                    << prefrec::fmt_double(a.total_clicks_std) << "), normalized "
                    << prefrec::fmt_double(a.normalized_clicks_mean) << " (std "
                    << prefrec::fmt_double(a.normalized_clicks_std) << ")\n";
        }
        std::cout << "wrote " << s.trajectory_csv << ", " << s.accuracy_csv << ", "
                  << s.aggregate_csv << "\n";
        if (cfg.emit_plots_after) {
          for (const std::string& p : prefrec::emit_plots(cfg.out_dir))
            std::cout << "wrote " << p << "\n";
        }
        break;
      }
      case prefrec::Mode::Plot: {
        for (const std::string& p : prefrec::emit_plots(cfg.out_dir))
          std::cout << "wrote " << p << "\n";
        break;
      }
    }
  } catch (const prefrec::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const prefrec::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const prefrec::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 4;
  } catch (const prefrec::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
