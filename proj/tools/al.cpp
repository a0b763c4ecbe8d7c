// al: command-line front end for the active-learning bias toolkit.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "albias/cli.hpp"
#include "albias/diagnostics.hpp"
#include "albias/error.hpp"

namespace {

using namespace albias;

template <class T>
std::optional<T> opt_if(const CLI::Option* o, const T& v) {
    return o->count() ? std::optional<T>(v) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pool-based active learning experiments: runs, sweeps, bias diagnostics, surrogate export."};
    app.require_subcommand(1);

    // gen-synth
    cli::GenSynthOptions gen;
    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("gen-synth", "Write a synthetic corpus directory");
    gen_cmd->add_option("--out", gen_out, "Output directory")->required();
    gen_cmd->add_option("--num-classes", gen.spec.num_classes, "Number of classes")->capture_default_str();
    gen_cmd->add_option("--seed", gen.spec.seed, "Generator seed")->capture_default_str();
    gen_cmd->add_option("--docs-per-class", gen.spec.docs_per_class, "Training documents per class")->capture_default_str();
    gen_cmd->add_option("--test-docs-per-class", gen.test_docs_per_class, "Test documents per class (0: no test split)")
        ->capture_default_str();
    gen_cmd->add_option("--class-vocab", gen.spec.class_vocab_size, "Private vocabulary size per class")->capture_default_str();
    gen_cmd->add_option("--shared-vocab", gen.spec.shared_vocab_size, "Shared vocabulary size")->capture_default_str();
    gen_cmd->add_option("--noise-rate", gen.spec.noise_rate, "Mean share of shared-vocabulary tokens")->capture_default_str();
    gen_cmd->add_option("--min-len", gen.spec.doc_length_range.first, "Minimum document length")->capture_default_str();
    gen_cmd->add_option("--max-len", gen.spec.doc_length_range.second, "Maximum document length")->capture_default_str();

    // run
    cli::RunOptions run;
    std::string run_corpus, run_out, model = "ftext", strategy = "entropy";
    std::size_t num_classes = 0, init_size = 0, delete_count = 0;
    auto* run_cmd = app.add_subcommand("run", "Run one active-learning loop and write its run log");
    run_cmd->add_option("--corpus", run_corpus, "Corpus directory (train.csv, optional test.csv)")->required();
    auto* run_nc = run_cmd->add_option("--num-classes", num_classes, "Number of classes (default: classes.txt or max label)");
    run_cmd->add_option("--model", model, "ftext or nbayes")->capture_default_str();
    run_cmd->add_option("--strategy", strategy,
                        "random, entropy, lc, del-entropy, del-lc, ens-entropy, ens-lc, coreset")
        ->capture_default_str();
    run_cmd->add_option("--k", run.config.query_size, "Query size K")->required();
    run_cmd->add_option("--rounds", run.config.rounds, "Number of queries b")->required();
    auto* run_init = run_cmd->add_option("--init-size", init_size, "Size of the random initial set (default: K)");
    run_cmd->add_option("--seed", run.config.seed, "Run seed")->capture_default_str();
    run_cmd->add_option("--ensemble-size", run.config.acquisition.ensemble_size, "Members for ens-* strategies")
        ->capture_default_str();
    auto* run_del = run_cmd->add_option("--delete-count", delete_count, "Deletions per round for del-* (default: K/2)");
    run_cmd->add_option("--dim", run.config.ftext.dim, "ftext embedding dimension")->capture_default_str();
    run_cmd->add_option("--epochs", run.config.ftext.epochs, "ftext epochs")->capture_default_str();
    run_cmd->add_option("--lr", run.config.ftext.initial_lr, "ftext initial learning rate")->capture_default_str();
    run_cmd->add_option("--out", run_out, "Run log path (default: stdout)");

    // sweep
    std::string plan_path, sweep_out;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run every configuration of a plan file");
    sweep_cmd->add_option("plan", plan_path, "Plan file")->required();
    auto* sweep_out_opt = sweep_cmd->add_option("--out", sweep_out, "Output directory (overrides the plan)");

    // diagnose
    std::string diag_kind, diag_corpus, diag_out;
    std::vector<std::string> diag_logs;
    std::size_t diag_nc = 0;
    auto* diag_cmd = app.add_subcommand("diagnose", "Build a report from run logs");
    diag_cmd->add_option("kind", diag_kind, "class-bias, intersection, calibration or curves")->required();
    diag_cmd->add_option("logs", diag_logs, "Run logs")->required();
    auto* diag_corpus_opt = diag_cmd->add_option("--corpus", diag_corpus, "Corpus directory (default: the log's source)");
    auto* diag_nc_opt = diag_cmd->add_option("--num-classes", diag_nc, "Number of classes");
    auto* diag_out_opt = diag_cmd->add_option("--out", diag_out, "Report directory (default: stdout)");

    // svm-overlap
    std::string svm_log, svm_corpus, svm_out;
    std::size_t svm_nc = 0;
    auto* svm_cmd = app.add_subcommand("svm-overlap", "Compare SVM support vectors with a run's acquired set");
    svm_cmd->add_option("log", svm_log, "Run log")->required();
    auto* svm_corpus_opt = svm_cmd->add_option("--corpus", svm_corpus, "Corpus directory (default: the log's source)");
    auto* svm_nc_opt = svm_cmd->add_option("--num-classes", svm_nc, "Number of classes");
    auto* svm_out_opt = svm_cmd->add_option("--out", svm_out, "Report directory (default: stdout)");

    // export-surrogate
    std::string exp_log, exp_corpus, exp_out;
    std::size_t exp_nc = 0;
    auto* exp_cmd = app.add_subcommand("export-surrogate", "Write a run's acquired set as a surrogate dataset");
    exp_cmd->add_option("log", exp_log, "Run log")->required();
    auto* exp_corpus_opt = exp_cmd->add_option("--corpus", exp_corpus, "Corpus directory (default: the log's source)");
    auto* exp_nc_opt = exp_cmd->add_option("--num-classes", exp_nc, "Number of classes");
    exp_cmd->add_option("--out", exp_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*gen_cmd) {
            gen.out = gen_out;
            cli::gen_synth(gen);
            std::cerr << "wrote " << gen_out << "\n";
        } else if (*run_cmd) {
            run.corpus = run_corpus;
            run.num_classes = opt_if(run_nc, num_classes);
            run.config.model = al::parse_model(model);
            run.config.acquisition.kind = al::parse_strategy(strategy);
            run.config.init_size = opt_if(run_init, init_size);
            run.config.acquisition.delete_count = opt_if(run_del, delete_count);
            run.config.ftext.validate();
            const al::RunLog log = cli::run(run);
            if (run_out.empty()) {
                std::cout << al::to_jsonl(log);
            } else {
                al::write_run_log(log, run_out);
            }
            std::cerr << diag::run_label(log) << ": " << al::acquired_set(log.result.state).size() << " acquired";
            if (log.result.state.final_accuracy) std::cerr << ", final accuracy " << *log.result.state.final_accuracy;
            std::cerr << "\n";
        } else if (*sweep_cmd) {
            cli::ExperimentPlan plan = cli::load_plan(plan_path);
            if (sweep_out_opt->count()) plan.out = sweep_out;
            const cli::SweepResult r = cli::sweep(plan);
            std::cerr << "wrote " << r.logs.size() << " run logs and report to " << plan.out.string() << "\n";
        } else if (*diag_cmd) {
            cli::DiagnoseOptions o;
            o.kind = cli::parse_diagnose_kind(diag_kind);
            o.logs.assign(diag_logs.begin(), diag_logs.end());
            if (diag_corpus_opt->count()) o.corpus = diag_corpus;
            o.num_classes = opt_if(diag_nc_opt, diag_nc);
            if (diag_out_opt->count()) o.out = diag_out;
            cli::diagnose(o, std::cout);
        } else if (*svm_cmd) {
            cli::SvmOverlapOptions o;
            o.log = svm_log;
            if (svm_corpus_opt->count()) o.corpus = svm_corpus;
            o.num_classes = opt_if(svm_nc_opt, svm_nc);
            if (svm_out_opt->count()) o.out = svm_out;
            cli::svm_overlap(o, std::cout);
        } else if (*exp_cmd) {
            cli::ExportOptions o;
            o.log = exp_log;
            if (exp_corpus_opt->count()) o.corpus = exp_corpus;
            o.num_classes = opt_if(exp_nc_opt, exp_nc);
            o.out = exp_out;
            const SurrogateManifest m = cli::export_run(o);
            std::cerr << "exported " << m.per_id.size() << " documents (compression ratio " << m.compression_ratio
                      << ")\n";
        }
    } catch (const Error& e) {
        std::cerr << "al: " << e.what() << "\n";
        return cli::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "al: internal error: " << e.what() << "\n";
        return cli::exit_code(ErrorKind::Compute);
    }
    return 0;
}
