#include "catkb/cli.hpp"

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "catkb/backends.hpp"
#include "catkb/digest.hpp"
#include "catkb/error.hpp"
#include "catkb/io.hpp"
#include "catkb/logistic_scorer.hpp"
#include "catkb/metrics.hpp"
#include "catkb/remote.hpp"

namespace catkb {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

int exit_code_for(const std::exception& e) {
  const auto* err = dynamic_cast<const Error*>(&e);
  if (err == nullptr) return 3;
  auto code_of = [](ErrorKind kind) {
    switch (kind) {
      case ErrorKind::undefined_metric: return 4;
      case ErrorKind::transport:
      case ErrorKind::protocol: return 5;
      case ErrorKind::stage: return 3;
      default: return 2;
    }
  };
  if (const auto* stage = dynamic_cast<const StageError*>(err)) {
    return code_of(stage->cause()) == 5 ? 5 : 3;
  }
  return code_of(err->kind());
}

namespace {

struct Backends {
  std::unique_ptr<ScorerBackend> teacher;
  std::unique_ptr<ScorerBackend> student;  // null: the teacher doubles as student
};

Backends make_backends(const RunRequest& r) {
  Backends b;
  const PromptConfig& prompts = r.cfg.prompts;
  if (r.scorer == "lexical") {
    b.teacher = std::make_unique<LexicalOverlapScorer>(prompts);
  } else if (r.scorer == "logistic") {
    b.teacher = std::make_unique<HashedLogisticScorer>(LogisticOptions{}, prompts);
    b.student = std::make_unique<HashedLogisticScorer>(LogisticOptions{}, prompts);
  } else if (r.scorer == "remote") {
    std::string endpoint = r.endpoint;
    if (endpoint.empty()) {
      if (const char* env = std::getenv("CAT_SCORER_ENDPOINT")) endpoint = env;
    }
    if (endpoint.empty()) {
      throw ConfigError("remote scorer needs --endpoint or CAT_SCORER_ENDPOINT");
    }
    b.teacher = std::make_unique<RemoteScorer>(RemoteOptions{endpoint});
  } else if (r.scorer == "recorded") {
    if (r.recorded.empty()) throw ConfigError("recorded scorer needs --recorded FILE");
    b.teacher = std::make_unique<RecordedScorer>(RecordedScorer::from_jsonl(r.recorded));
  } else {
    throw ConfigError("unknown scorer '" + r.scorer +
                      "' (expected lexical, logistic, remote or recorded)");
  }
  return b;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

std::string generic(const fs::path& p) { return p.generic_string(); }

}  // namespace

RunOutcome execute_run(const RunRequest& request) {
  request.cfg.validate();
  const std::string started = utc_now();
  const auto clock_start = std::chrono::steady_clock::now();
  const DatasetBundle bundle =
      load_bundle(request.events, request.concepts, request.triples, request.load);
  Backends backends = make_backends(request);
  ScorerBackend& teacher = *backends.teacher;
  ScorerBackend& student = backends.student ? *backends.student : *backends.teacher;

  fs::create_directories(request.out);
  std::vector<fs::path> outputs;
  write_bundle(bundle, request.out / "bundle");
  for (const char* name : {"events.jsonl", "conceptualizations.jsonl", "triples.jsonl"}) {
    outputs.push_back(fs::path("bundle") / name);
  }

  RunOutcome outcome;
  outcome.result = run_cat(bundle, request.cfg, CatBackends{teacher, student}, request.out);
  for (const auto& p : outcome.result.outputs) outputs.push_back(p);

  const PromptForge forge(request.cfg.prompts);
  try {
    export_abstract_knowledge(bundle, outcome.result.event_store, outcome.result.triple_store,
                              request.cfg.export_threshold, forge, request.out / "exports");
  } catch (const Error& e) {
    throw StageError("export", e.kind(), e.what());
  }
  outputs.emplace_back("exports/comet.tsv");
  outputs.emplace_back("exports/generative.jsonl");

  ordered_json timings = outcome.result.timings;
  const std::chrono::duration<double> total = std::chrono::steady_clock::now() - clock_start;
  io::write_file_atomic(request.out / "timings.json",
                    ordered_json{{"started_at", started},
                                 {"finished_at", utc_now()},
                                 {"total_seconds", total.count()},
                                 {"stages", timings}}
                            .dump(2) +
                        "\n");

  ordered_json manifest;
  manifest["config"] = request.cfg.to_json();
  manifest["scorer"] = request.scorer;
  manifest["inputs"] = ordered_json::array();
  for (const fs::path& p : {request.events, request.concepts, request.triples}) {
    manifest["inputs"].push_back(ordered_json{{"path", generic(p)}, {"sha256", sha256_file(p)}});
  }
  manifest["backends"] = ordered_json{{"teacher", teacher.identity()},
                                      {"student", student.identity()}};
  manifest["outputs"] = ordered_json::array();
  for (const fs::path& rel : outputs) {
    manifest["outputs"].push_back(
        ordered_json{{"path", generic(rel)}, {"sha256", sha256_file(request.out / rel)}});
  }
  outcome.manifest = request.out / "manifest.json";
  io::write_file_atomic(outcome.manifest, manifest.dump(2) + "\n");
  return outcome;
}

namespace {

struct BundlePaths {
  std::string events;
  std::string concepts;
  std::string triples;
  std::string bundle_dir;

  void add(CLI::App* app, bool required) {
    auto* e = app->add_option("--events", events, "events.jsonl");
    auto* c = app->add_option("--concepts", concepts, "conceptualizations.jsonl");
    auto* t = app->add_option("--triples", triples, "triples.jsonl");
    auto* b = app->add_option("--bundle", bundle_dir,
                              "directory holding events.jsonl, conceptualizations.jsonl and "
                              "triples.jsonl");
    if (required) {
      b->excludes(e)->excludes(c)->excludes(t);
    }
  }

  void resolve() {
    if (!bundle_dir.empty()) {
      events = (fs::path(bundle_dir) / "events.jsonl").string();
      concepts = (fs::path(bundle_dir) / "conceptualizations.jsonl").string();
      triples = (fs::path(bundle_dir) / "triples.jsonl").string();
    }
    if (events.empty() || concepts.empty() || triples.empty()) {
      throw ConfigError("give --bundle DIR or all of --events, --concepts and --triples");
    }
  }
};

std::vector<json> read_jsonl(const fs::path& path) {
  std::vector<json> rows;
  io::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (line.find_first_not_of(" \t") == std::string_view::npos) return;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  });
  return rows;
}

template <typename T>
T field(const json& row, const char* key, const fs::path& path) {
  try {
    return row.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError(path.string() + ": row lacks a valid \"" + key + "\" field");
  }
}

ordered_json eval_auc(const fs::path& pred_path, const fs::path& gold_path) {
  std::map<std::string, double> pred;
  for (const json& row : read_jsonl(pred_path)) {
    pred[field<std::string>(row, "item_key", pred_path)] = field<double>(row, "score", pred_path);
  }
  std::vector<double> scores;
  std::vector<int> labels;
  for (const json& row : read_jsonl(gold_path)) {
    const auto key = field<std::string>(row, "item_key", gold_path);
    const auto it = pred.find(key);
    if (it == pred.end()) throw LookupError("no prediction for gold item '" + key + "'");
    scores.push_back(it->second);
    labels.push_back(field<int>(row, "label", gold_path));
  }
  return ordered_json{{"auc", auc(scores, labels)}, {"items", labels.size()}};
}

ordered_json eval_nlg(const fs::path& items_path, int bleu_order) {
  std::vector<GenerationEvalItem> items;
  for (const json& row : read_jsonl(items_path)) {
    items.push_back({field<std::string>(row, "candidate", items_path),
                     field<std::vector<std::string>>(row, "references", items_path)});
  }
  return evaluate_generations(items, bleu_order);
}

fs::path latest_store(const fs::path& stores, Task task) {
  const std::string prefix = std::string(to_string(task)) + ".gen";
  int best = -1;
  fs::path found;
  if (fs::is_directory(stores)) {
    for (const auto& entry : fs::directory_iterator(stores)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind(prefix, 0) != 0 || entry.path().extension() != ".jsonl") continue;
      const int gen = std::stoi(name.substr(prefix.size()));
      if (gen > best) {
        best = gen;
        found = entry.path();
      }
    }
  }
  if (best < 0) throw IoError("no " + prefix + "*.jsonl store under '" + stores.string() + "'");
  return found;
}

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Conceptualization toolkit for event-centric commonsense knowledge bases"};
  app.require_subcommand(1);

  BundlePaths ingest_paths;
  std::string ingest_out;
  bool strict = false;
  auto* ingest = app.add_subcommand("ingest", "validate dataset files and print statistics");
  ingest_paths.add(ingest, false);
  ingest->add_option("--out", ingest_out, "write the canonical bundle here");
  ingest->add_flag("--strict-duplicates", strict, "fail on duplicate rows");

  BundlePaths stats_paths;
  auto* stats = app.add_subcommand("stats", "print corpus statistics");
  stats_paths.add(stats, true);
  stats->add_flag("--strict-duplicates", strict, "fail on duplicate rows");

  BundlePaths run_paths;
  std::string config_path, run_out = "artifacts", scorer, endpoint, recorded;
  std::optional<double> t_plus, t_minus, export_threshold;
  std::optional<int> m, n, rounds;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run the teacher/student loop and export");
  run_paths.add(run, true);
  run->add_option("--config", config_path, "pipeline config JSON");
  run->add_option("--out", run_out, "artifacts directory")->capture_default_str();
  run->add_option("--scorer", scorer, "lexical | logistic | remote | recorded");
  run->add_option("--endpoint", endpoint, "remote scorer URL (default $CAT_SCORER_ENDPOINT)");
  run->add_option("--recorded", recorded, "JSONL of recorded prompt scores");
  run->add_option("--t-plus", t_plus);
  run->add_option("--t-minus", t_minus);
  run->add_option("--m", m, "alternative concepts per prompt");
  run->add_option("--n", n, "instantiations per prompt");
  run->add_option("--refinement-rounds", rounds);
  run->add_option("--seed", seed);
  run->add_option("--export-threshold", export_threshold);
  run->add_flag("--strict-duplicates", strict, "fail on duplicate rows");

  std::string artifacts, bundle_dir, event_store_path, triple_store_path, export_out;
  double threshold = 0.95;
  auto* exp = app.add_subcommand("export", "write COMET and generative training files");
  exp->add_option("--artifacts", artifacts, "artifacts directory of a previous run");
  exp->add_option("--bundle", bundle_dir, "bundle directory");
  exp->add_option("--event-store", event_store_path);
  exp->add_option("--triple-store", triple_store_path);
  exp->add_option("--threshold", threshold)->capture_default_str();
  exp->add_option("--out", export_out, "output directory")->required();

  std::string task, pred, gold, items;
  int bleu_order = 2;
  auto* eval = app.add_subcommand("eval", "evaluate scores or generations");
  eval->add_option("--task", task, "auc | nlg")->required();
  eval->add_option("--pred", pred, "JSONL {item_key, score}");
  eval->add_option("--gold", gold, "JSONL {item_key, label}");
  eval->add_option("--items", items, "JSONL {candidate, references}");
  eval->add_option("--bleu-order", bleu_order, "highest BLEU order reported")
      ->capture_default_str();

  std::string host = "127.0.0.1", backend_name = "logistic";
  int port = 8080;
  auto* serve = app.add_subcommand("serve-mock", "serve a local backend over HTTP");
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port, "0 picks a free port")->capture_default_str();
  serve->add_option("--backend", backend_name, "logistic | lexical")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (ingest->parsed() || stats->parsed()) {
      BundlePaths& paths = ingest->parsed() ? ingest_paths : stats_paths;
      paths.resolve();
      const DatasetBundle bundle =
          load_bundle(paths.events, paths.concepts, paths.triples, LoadOptions{strict});
      for (const auto& w : bundle.diagnostics().warnings) std::cerr << "warning: " << w << "\n";
      if (!ingest_out.empty()) write_bundle(bundle, ingest_out);
      std::cout << to_json(compute_stats(bundle)).dump(2) << "\n";
      return 0;
    }
    if (run->parsed()) {
      run_paths.resolve();
      RunRequest r;
      r.events = run_paths.events;
      r.concepts = run_paths.concepts;
      r.triples = run_paths.triples;
      r.out = run_out;
      r.load.strict_duplicates = strict;
      json config_json = json::object();
      if (!config_path.empty()) {
        try {
          config_json = json::parse(io::read_file(config_path));
        } catch (const json::exception& e) {
          throw ConfigError(config_path + ": " + e.what());
        }
        if (!config_json.is_object()) throw ConfigError(config_path + ": expected an object");
      }
      // Scorer settings may live in the config file; flags win.
      if (config_json.contains("scorer")) {
        r.scorer = config_json["scorer"].get<std::string>();
        config_json.erase("scorer");
      }
      if (config_json.contains("endpoint")) {
        r.endpoint = config_json["endpoint"].get<std::string>();
        config_json.erase("endpoint");
      }
      if (t_plus) config_json["t_plus"] = *t_plus;
      if (t_minus) config_json["t_minus"] = *t_minus;
      if (m) config_json["m"] = *m;
      if (n) config_json["n"] = *n;
      if (rounds) config_json["refinement_rounds"] = *rounds;
      if (seed) config_json["random_seed"] = *seed;
      if (export_threshold) config_json["export_threshold"] = *export_threshold;
      r.cfg = PipelineConfig::from_json(config_json);
      if (!scorer.empty()) r.scorer = scorer;
      if (!endpoint.empty()) r.endpoint = endpoint;
      r.recorded = recorded;
      const RunOutcome outcome = execute_run(r);
      std::cout << ordered_json{{"artifacts", generic(r.out)},
                                {"manifest", generic(outcome.manifest)},
                                {"dev_auc", outcome.result.report["dev_auc"]}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (exp->parsed()) {
      fs::path bundle_path = bundle_dir;
      fs::path es = event_store_path, ts = triple_store_path;
      PipelineConfig cfg;
      if (!artifacts.empty()) {
        const fs::path a = artifacts;
        if (bundle_path.empty()) bundle_path = a / "bundle";
        if (es.empty()) es = latest_store(a / "stores", Task::event_conceptualization);
        if (ts.empty()) ts = latest_store(a / "stores", Task::triple_conceptualization);
        const fs::path report = a / "report.json";
        if (fs::exists(report)) {
          const json rep = json::parse(io::read_file(report));
          if (rep.contains("config")) cfg = PipelineConfig::from_json(rep["config"]);
        }
      }
      if (bundle_path.empty() || es.empty() || ts.empty()) {
        throw ConfigError("give --artifacts DIR or all of --bundle, --event-store, --triple-store");
      }
      if (!(threshold >= 0.0 && threshold <= 1.0)) {
        throw ConfigError("--threshold must lie in [0, 1]");
      }
      const DatasetBundle bundle =
          load_bundle(bundle_path / "events.jsonl", bundle_path / "conceptualizations.jsonl",
                      bundle_path / "triples.jsonl");
      const ExportSummary s = export_abstract_knowledge(
          bundle, read_store(es, Task::event_conceptualization),
          read_store(ts, Task::triple_conceptualization), threshold, PromptForge(cfg.prompts),
          export_out);
      std::cout << ordered_json{{"threshold", threshold},
                                {"triples", s.triples},
                                {"conceptualizations", s.conceptualizations},
                                {"comet", generic(s.comet_path)},
                                {"generative", generic(s.generative_path)}}
                       .dump(2)
                << "\n";
      return 0;
    }
    if (eval->parsed()) {
      ordered_json out;
      if (task == "auc") {
        if (pred.empty() || gold.empty()) throw ConfigError("--task auc needs --pred and --gold");
        out = eval_auc(pred, gold);
      } else if (task == "nlg") {
        if (items.empty()) throw ConfigError("--task nlg needs --items");
        out = eval_nlg(items, bleu_order);
      } else {
        throw ConfigError("unknown eval task '" + task + "' (expected auc or nlg)");
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (serve->parsed()) {
      std::unique_ptr<ScorerBackend> backend;
      if (backend_name == "logistic") {
        backend = std::make_unique<HashedLogisticScorer>();
      } else if (backend_name == "lexical") {
        backend = std::make_unique<LexicalOverlapScorer>();
      } else {
        throw ConfigError("unknown mock backend '" + backend_name + "'");
      }
      MockScoringService service(std::move(backend));
      service.start(host, port);
      std::cout << ordered_json{{"endpoint", service.endpoint()}}.dump() << std::endl;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      service.stop();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return 2;
}

}  // namespace catkb
