// saltdialog: command-line driver for ingestion, ontology expansion, corpus
// generation, evaluation and the live service.
//
// Exit codes: 0 success, 1 data or runtime error, 2 usage error.

#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "saltdialog/convgen.hpp"
#include "saltdialog/dst.hpp"
#include "saltdialog/errors.hpp"
#include "saltdialog/evalx.hpp"
#include "saltdialog/food_kb.hpp"
#include "saltdialog/service.hpp"
#include "saltdialog/templates.hpp"
#include "saltdialog/units.hpp"

namespace sd = saltdialog;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsage = 2;

void log(const std::string& msg) { std::cerr << "saltdialog: " << msg << '\n'; }

struct Resources {
    std::string kb;
    std::string ontology;
    std::string units;
    std::string templates;

    void add_to(CLI::App* cmd, bool kb_required = true) {
        auto* k = cmd->add_option("--kb", kb, "Knowledge base: a .json artifact from 'ingest', or CSV/JSONL records")
                      ->check(CLI::ExistingFile);
        if (kb_required)
            k->required();
        cmd->add_option("--ontology", ontology, "Ontology JSON, needed when --kb is CSV/JSONL")
            ->check(CLI::ExistingFile);
        cmd->add_option("--units", units, "Unit table JSON (default: built-in mass units)")->check(CLI::ExistingFile);
        cmd->add_option("--templates", templates, "Template pack JSON (default: built-in pack)")
            ->check(CLI::ExistingFile);
    }

    sd::UnitTable load_units() const { return units.empty() ? sd::UnitTable::defaults() : sd::UnitTable::load(units); }
    sd::TemplatePack load_templates() const {
        return templates.empty() ? sd::TemplatePack::builtin() : sd::TemplatePack::load(templates);
    }
    sd::KnowledgeBase load_kb(const sd::UnitTable& u) const {
        std::filesystem::path p(kb);
        if (p.extension() == ".json")
            return sd::KnowledgeBase::load(p);
        if (ontology.empty())
            throw sd::ConfigError("--ontology is required to ingest " + kb);
        return sd::ingest_records(p, sd::Ontology::load(ontology), u);
    }
};

void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw sd::ConfigError("cannot write " + path);
    out << j.dump(2) << '\n';
    if (!out)
        throw sd::ConfigError("failed writing " + path);
}

struct PredictorFlags {
    std::string kind = "reference";
    double salt_prob = 1.0;
    double slot_prob = 0.1;
    std::uint64_t seed = 0;
    std::string endpoint;
    double timeout = 10.0;
    int retries = 1;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--predictor", kind, "Belief predictor")
            ->check(CLI::IsMember({"reference", "corrupting", "remote"}))
            ->capture_default_str();
        cmd->add_option("--salt-corrupt-prob", salt_prob, "Corrupting predictor: salt corruption probability")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd->add_option("--slot-corrupt-prob", slot_prob, "Corrupting predictor: per-slot corruption probability")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        cmd->add_option("--corrupt-seed", seed, "Corrupting predictor: seed")->capture_default_str();
        cmd->add_option("--endpoint", endpoint, "Remote predictor base URL (POSTs to <endpoint>/predict)");
        cmd->add_option("--timeout", timeout, "Remote predictor timeout in seconds")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--retries", retries, "Remote predictor retries")->check(CLI::NonNegativeNumber)
            ->capture_default_str();
    }

    sd::PredictorKind predictor() const { return *sd::predictor_kind_from_string(kind); }
    sd::CorruptionConfig corruption() const { return {salt_prob, slot_prob, seed}; }
    sd::RemoteConfig remote() const { return {endpoint, timeout, retries}; }
};

// ---- ingest -------------------------------------------------------------------

struct IngestCmd {
    std::string records, ontology, units, out, report;

    void setup(CLI::App& app) {
        auto* c = app.add_subcommand("ingest", "Parse food records into a knowledge-base artifact");
        c->add_option("--kb", records, "Records file (CSV, or .jsonl/.ndjson)")->required()->check(CLI::ExistingFile);
        c->add_option("--ontology", ontology, "Ontology JSON")->required()->check(CLI::ExistingFile);
        c->add_option("--units", units, "Unit table JSON")->check(CLI::ExistingFile);
        c->add_option("--out", out, "Where to write the knowledge-base JSON")->required();
        c->add_option("--report", report, "Where to write the rejection report (default: stdout)");
        c->callback([this] { run(); });
    }

    int code = kOk;
    void run() {
        const auto u = units.empty() ? sd::UnitTable::defaults() : sd::UnitTable::load(units);
        auto result = sd::ingest_records_report(records, sd::Ontology::load(ontology), u);
        result.kb.save(out);
        nlohmann::json rej = nlohmann::json::array();
        for (const auto& r : result.rejected)
            rej.push_back({{"row", r.id}, {"reason", r.reason}, {"duplicate", r.duplicate}});
        nlohmann::json rep{{"accepted", result.kb.size()}, {"rejected", rej}};
        if (report.empty())
            std::cout << rep.dump(2) << '\n';
        else
            write_json(rep, report);
        log("ingested " + std::to_string(result.kb.size()) + " records, rejected " +
            std::to_string(result.rejected.size()));
        for (const auto& r : result.rejected)
            log("row " + std::to_string(r.id) + ": " + r.reason);
        code = result.rejected.empty() ? kOk : kDataError;
    }
};

// ---- ontology expand ------------------------------------------------------------

struct ExpandCmd {
    std::string ontology, neighbors, out;
    double threshold = sd::kDefaultExpansionThreshold;

    void setup(CLI::App& app) {
        auto* group = app.add_subcommand("ontology", "Ontology maintenance");
        group->require_subcommand(1);
        auto* c = group->add_subcommand("expand", "Add embedding neighbors of seed terms to the ontology");
        c->add_option("--ontology", ontology, "Seed ontology JSON")->required()->check(CLI::ExistingFile);
        c->add_option("--neighbors", neighbors, "Neighbor CSV (seed_term,neighbor_term,similarity)")
            ->required()
            ->check(CLI::ExistingFile);
        c->add_option("--threshold", threshold, "Minimum similarity")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        c->add_option("--out", out, "Where to write the expanded ontology")->required();
        c->callback([this] { run(); });
    }

    void run() {
        auto rows = sd::read_neighbor_file(neighbors);
        auto result = sd::expand_ontology(sd::Ontology::load(ontology), rows, threshold);
        result.ontology.save(out);
        std::cout << result.report.to_json().dump(2) << '\n';
        log("added " + std::to_string(result.report.added.size()) + " terms");
    }
};

// ---- generate -------------------------------------------------------------------

struct GenerateCmd {
    Resources res;
    sd::GenConfig cfg;
    std::size_t n = 0;
    std::string out;

    void setup(CLI::App& app) {
        auto* c = app.add_subcommand("generate", "Generate an annotated dialogue corpus");
        res.add_to(c);
        c->add_option("-n,--dialogues", n, "Number of dialogues")->required()->check(CLI::Range(std::size_t{1}, std::size_t{100000000}));
        c->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
        c->add_option("--random-rate", cfg.random_turn_rate, "Per-reply probability of a random-slot answer")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        c->add_option("--changing-rate", cfg.changing_turn_rate, "Per-reply probability of a changed answer")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        c->add_option("--max-questions", cfg.max_questions, "Question budget per dialogue")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        c->add_option("--standard-weight-prob", cfg.standard_weight_prob,
                      "Probability that the goal weight is the standard serving")
            ->check(CLI::Range(0.0, 1.0))
            ->capture_default_str();
        c->add_option("--out", out, "Where to write the corpus JSON")->required();
        c->callback([this] { run(); });
    }

    void run() {
        cfg.n_dialogues = n;
        const auto units = res.load_units();
        const auto pack = res.load_templates();
        const auto kb = res.load_kb(units);
        auto generated = sd::generate_corpus(kb, cfg, units, pack);
        sd::export_corpus(generated.corpus, out);
        std::cout << generated.stats.to_json().dump(2) << '\n';
        log("wrote " + std::to_string(generated.corpus.dialogues.size()) + " dialogues to " + out);
    }
};

// ---- evaluate -------------------------------------------------------------------

struct EvaluateCmd {
    Resources res;
    PredictorFlags pred;
    std::string corpus, out;
    bool ns_correct = false;
    bool json = false;

    void setup(CLI::App& app) {
        auto* c = app.add_subcommand("evaluate", "Score a belief predictor on a corpus");
        res.add_to(c);
        pred.add_to(c);
        c->add_option("--corpus", corpus, "Corpus JSON from 'generate'")->required()->check(CLI::ExistingFile);
        c->add_flag("--ns-correct", ns_correct, "Also report metrics after symbolic salt correction");
        c->add_flag("--json", json, "Print the report as JSON instead of a table");
        c->add_option("--out", out, "Also write the JSON report here");
        c->callback([this] { run(); });
    }

    void run() {
        const auto units = res.load_units();
        const auto pack = res.load_templates();
        const auto kb = res.load_kb(units);
        sd::EvalOptions opts{pred.predictor(), pred.corruption(), pred.remote()};
        if (opts.predictor == sd::PredictorKind::remote && opts.remote.endpoint.empty())
            throw sd::ConfigError("--predictor remote needs --endpoint");
        auto result = sd::evaluate_corpus(sd::import_corpus(corpus), kb, opts, units, pack);

        nlohmann::json j = result.to_json();
        j["ns_correct"] = ns_correct;
        j["report"] = ns_correct ? j["post_correction"] : j["pre_correction"];
        if (!ns_correct)
            j.erase("post_correction");
        if (json)
            std::cout << j.dump(2) << '\n';
        else
            std::cout << result.table(ns_correct);
        if (!out.empty())
            write_json(j, out);
    }
};

// ---- serve ----------------------------------------------------------------------

struct ServeCmd {
    Resources res;
    PredictorFlags pred;
    sd::PolicyConfig policy;
    sd::HttpConfig http;
    std::string transcript_log;
    long port = 8080;

    void setup(CLI::App& app) {
        auto* c = app.add_subcommand("serve", "Run the HTTP dialog service");
        res.add_to(c);
        pred.add_to(c);
        c->add_option("--host", http.host, "Bind address")->capture_default_str();
        c->add_option("--port", port, "Port (0 picks a free one)")->capture_default_str();
        c->add_option("--cors-origin", http.cors_origin, "Allowed CORS origin (empty disables CORS)")
            ->capture_default_str();
        c->add_option("--max-questions", policy.max_questions, "Question budget per session")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        c->add_option("--max-turns", policy.max_turns, "User messages per session")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        c->add_option("--ttl", policy.ttl_seconds, "Idle seconds before a session expires")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        c->add_option("--max-sessions", policy.max_sessions, "Concurrent session limit")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        c->add_option("--transcript-log", transcript_log, "Append every turn as a JSON line to this file");
        c->callback([this] { run(); });
    }

    void run() {
        if (port < 0 || port > 65535)
            throw sd::ConfigError("port " + std::to_string(port) + " is out of range");
        http.port = static_cast<int>(port);
        policy.predictor = pred.predictor();
        policy.corruption = pred.corruption();
        policy.remote = pred.remote();

        const auto units = res.load_units();
        const auto pack = res.load_templates();
        const auto kb = res.load_kb(units);
        sd::DialogManager manager(kb, units, pack, policy);
        if (!transcript_log.empty())
            manager.set_transcript_log(transcript_log);
        sd::HttpService service(manager, http);

        // Signals are taken synchronously by a watcher thread; every other
        // thread keeps them blocked.
        sigset_t set;
        sigemptyset(&set);
        sigaddset(&set, SIGINT);
        sigaddset(&set, SIGTERM);
        pthread_sigmask(SIG_BLOCK, &set, nullptr);

        const int bound = service.bind();
        log("listening on http://" + http.host + ":" + std::to_string(bound));
        std::thread watcher([&] {
            int sig = 0;
            sigwait(&set, &sig);
            log(std::string("received ") + (sig == SIGINT ? "SIGINT" : "SIGTERM") + ", shutting down");
            service.stop();
        });
        service.serve();
        watcher.join();
        log("stopped");
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Salt-intake dialogue toolkit"};
    app.name("saltdialog");
    app.set_config("--config", "", "TOML/INI file with option defaults; flags given on the command line win")
        ->envname("SALT_DIALOG_CONFIG")
        ->check(CLI::ExistingFile);
    app.require_subcommand(1);

    IngestCmd ingest;
    ExpandCmd expand;
    GenerateCmd generate;
    EvaluateCmd evaluate;
    ServeCmd serve;
    ingest.setup(app);
    expand.setup(app);
    generate.setup(app);
    evaluate.setup(app);
    serve.setup(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    } catch (const sd::Error& e) {
        log(std::string("error: ") + e.what());
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        log(std::string("error: ") + e.what());
        return kDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        log(std::string("error: ") + e.what());
        return kDataError;
    }
    return ingest.code;
}
