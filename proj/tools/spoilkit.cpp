// spoilkit: pipeline stages as subcommands. Every stage reads and writes
// files so stages can be rerun or inspected independently.

#include <CLI11.hpp>
#include <pthread.h>
#include <signal.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <thread>

#include "spoilkit/cleaner.hpp"
#include "spoilkit/corpus.hpp"
#include "spoilkit/dataset.hpp"
#include "spoilkit/embedding.hpp"
#include "spoilkit/errors.hpp"
#include "spoilkit/evalrun.hpp"
#include "spoilkit/review.hpp"
#include "spoilkit/spanlab.hpp"

namespace fs = std::filesystem;
using namespace spoilkit;

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

void emit(const std::string& out, const std::string& content) {
  if (out == "-") {
    std::fwrite(content.data(), 1, content.size(), stdout);
    std::fflush(stdout);
  } else {
    write_file(out, content);
  }
}

// Refuses to overwrite an input, so no stage can mutate what it reads.
void check_distinct(const std::string& in, const std::string& out) {
  if (out == "-" || !fs::exists(in) || !fs::exists(out)) return;
  if (fs::equivalent(in, out)) {
    throw ValidationError("output " + out + " is the same file as input " + in);
  }
}

struct IngestArgs {
  std::string in, out = "corpus.jsonl", source = "other", format = "jsonl", delimiter;
};

int run_ingest(const IngestArgs& a) {
  check_distinct(a.in, a.out);
  IngestOptions opts;
  opts.source = parse_source(a.source);
  opts.format = parse_dump_format(a.format);
  if (!a.delimiter.empty()) opts.split_delimiter = a.delimiter;
  const Corpus corpus = ingest_dump(a.in, opts);
  emit(a.out, serialize_corpus(corpus));
  std::cerr << corpus.stats().to_json().dump(2) << "\n";
  return 0;
}

struct CleanArgs {
  std::string in = "corpus.jsonl", out = "cleaned.jsonl", rules, outcomes;
};

int run_clean(const CleanArgs& a) {
  check_distinct(a.in, a.out);
  const RuleSet rules = a.rules.empty() ? RuleSet::defaults() : RuleSet::load(a.rules);
  const CleanReport report = clean_corpus(load_corpus(a.in), rules);
  emit(a.out, serialize_corpus(report.corpus));
  if (!a.outcomes.empty()) write_file(a.outcomes, serialize_outcomes(report.outcomes));
  std::map<std::string, std::size_t> actions;
  for (const auto& o : report.outcomes) ++actions[std::string(to_string(o.action))];
  const Json summary = {{"actions", actions},
                        {"flagged_fraction", report.flagged_fraction},
                        {"kept_posts", report.corpus.size()}};
  std::cerr << summary.dump(2) << "\n";
  return 0;
}

struct LabelArgs {
  std::string in = "cleaned.jsonl", out = "labeled.jsonl";
  LabelerConfig cfg;
};

int run_label(const LabelArgs& a) {
  check_distinct(a.in, a.out);
  a.cfg.validate();
  const LabelRun run = label_corpus(load_corpus(a.in), a.cfg);
  emit(a.out, serialize_labeled(run.examples));
  std::cerr << run.summary().dump(2) << "\n";
  return 0;
}

struct SplitArgs {
  std::string in = "labeled.jsonl", out = "split.json";
  std::uint64_t seed = 42;
};

int run_split(const SplitArgs& a) {
  check_distinct(a.in, a.out);
  const DataSplit split = split_corpus(load_labeled(a.in), a.seed);
  emit(a.out, canonical_json(split.to_json()) + "\n");
  for (const auto& w : split.warnings) std::cerr << "warning: " << w << "\n";
  std::cerr << "train " << split.train.size() << ", validation " << split.validation.size()
            << ", test " << split.test.size() << "\n";
  return 0;
}

struct ExportArgs {
  std::string labeled = "labeled.jsonl", split = "split.json", part = "train";
  std::string format = "extractive", out = "-", decisions;
  bool include_flagged = false, skip_unreviewed = false;
};

std::vector<LabeledExample> load_reviewed(const std::string& labeled,
                                          const std::string& decisions) {
  auto examples = load_labeled(labeled);
  if (decisions.empty()) return examples;
  return apply_decisions(std::move(examples), DecisionLog::read(decisions));
}

int run_export(const ExportArgs& a) {
  check_distinct(a.labeled, a.out);
  const auto examples = load_reviewed(a.labeled, a.decisions);
  const DataSplit split = DataSplit::load(a.split);
  const SplitPart part = parse_split_part(a.part);
  const ExportOptions opts{a.include_flagged, a.skip_unreviewed};
  std::string content;
  if (a.format == "extractive") {
    content = export_extractive(examples, split, part, opts);
  } else if (a.format == "abstractive") {
    content = export_abstractive(examples, split, part, opts);
  } else if (a.format == "predictions-template") {
    content = export_predictions_template(examples, split, part, opts);
  } else {
    throw ValidationError("unknown export format '" + a.format + "'");
  }
  emit(a.out, content);
  return 0;
}

struct EvalArgs {
  std::string labeled = "labeled.jsonl", split = "split.json", part = "test";
  std::vector<std::string> predictions;
  std::string out = "eval.json";
  std::string provider = "none", lookup_file, embed_url;
  std::uint64_t provider_seed = 0;
  std::size_t provider_dim = 64;
  bool include_flagged = false;
};

std::unique_ptr<EmbeddingProvider> make_provider(const EvalArgs& a) {
  if (a.provider == "none") return nullptr;
  if (a.provider == "hash") return std::make_unique<HashProvider>(a.provider_seed, a.provider_dim);
  if (a.provider == "lookup") {
    if (a.lookup_file.empty()) throw ValidationError("--provider lookup needs --lookup-file");
    return std::make_unique<LookupProvider>(LookupProvider::load(a.lookup_file));
  }
  if (a.provider == "http") {
    if (a.embed_url.empty()) throw ValidationError("--provider http needs --embed-url");
    return std::make_unique<HttpProvider>(a.embed_url);
  }
  throw ValidationError("unknown provider '" + a.provider + "'");
}

int run_eval(const EvalArgs& a) {
  for (const auto& p : a.predictions) check_distinct(p, a.out);
  const auto examples = load_labeled(a.labeled);
  const DataSplit split = DataSplit::load(a.split);
  const auto refs = references_for(examples, split, parse_split_part(a.part), a.include_flagged);
  const auto provider = make_provider(a);

  EvalReport report;
  report.split_id = a.part;
  report.example_count = refs.size();
  for (const auto& spec : a.predictions) {
    // NAME=PATH, or PATH with the file stem as the model name.
    const auto eq = spec.find('=');
    const std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
    const std::string name =
        eq == std::string::npos ? fs::path(spec).stem().string() : spec.substr(0, eq);
    report.rows.push_back(evaluate(PredictionSet::load(path, name), refs, provider.get()));
  }
  emit(a.out, canonical_json(report.to_json()) + "\n");
  std::cerr << render_report(report, ReportFormat::text_table);
  return 0;
}

struct ReportArgs {
  std::string in = "eval.json", format = "text", out = "-";
};

int run_report(const ReportArgs& a) {
  check_distinct(a.in, a.out);
  emit(a.out, render_report(EvalReport::load(a.in), parse_report_format(a.format)));
  return 0;
}

struct ServeArgs {
  std::string labeled = "labeled.jsonl", log = "decisions.jsonl", bind = "127.0.0.1:8080";
  std::string static_dir;
};

int run_serve(const ServeArgs& a) {
  const auto [host, port] = parse_bind(a.bind);
  ReviewService service(load_labeled(a.labeled), a.log);

  // Signals go to a dedicated thread; handler threads never see them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::optional<fs::path> static_dir;
  if (!a.static_dir.empty()) static_dir = a.static_dir;
  ReviewServer server(service, static_dir);
  int bound = port;
  if (port == 0) {
    bound = server.bind_any(host);
  }
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::cerr << "reviewing " << service.state().pending.size() << " pending examples on " << host
            << ":" << bound << "\n";
  try {
    if (port == 0) {
      server.serve();
    } else {
      server.listen(host, port);
    }
  } catch (...) {
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    throw;
  }
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  std::cerr << service.stats_json().dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spoilkit: clickbait spoiler dataset pipeline"};
  app.set_config("--config", "", "TOML/INI file with defaults; flags take precedence");
  app.require_subcommand(1);
  app.fallthrough();

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Normalize a raw dump into a corpus JSONL");
  c_ingest->add_option("--in", ingest.in, "Raw dump file")->required();
  c_ingest->add_option("--out", ingest.out, "Corpus JSONL ('-' for stdout)")->capture_default_str();
  c_ingest->add_option("--source", ingest.source, "reddit, facebook or other")
      ->capture_default_str();
  c_ingest->add_option("--format", ingest.format, "jsonl or csv")->capture_default_str();
  c_ingest->add_option("--split-on-delimiter", ingest.delimiter,
                       "Split a combined 'title <delim> answer' field");

  CleanArgs clean;
  auto* c_clean = app.add_subcommand("clean", "Strip boilerplate and flag noisy answers");
  c_clean->add_option("--in", clean.in, "Corpus JSONL")->capture_default_str();
  c_clean->add_option("--out", clean.out, "Cleaned corpus JSONL")->capture_default_str();
  c_clean->add_option("--rules", clean.rules, "Rule file (default: built-in rules)");
  c_clean->add_option("--outcomes", clean.outcomes, "Write per-post cleaning outcomes JSONL");

  LabelArgs label;
  auto* c_label = app.add_subcommand("label", "Locate answer spans in article text");
  c_label->add_option("--in", label.in, "Cleaned corpus JSONL")->capture_default_str();
  c_label->add_option("--out", label.out, "Labeled JSONL")->capture_default_str();
  c_label->add_option("--tau", label.cfg.tau, "Fuzzy acceptance threshold")->capture_default_str();
  c_label->add_option("--delta", label.cfg.delta, "Ambiguity margin")->capture_default_str();
  c_label->add_option("--window-slack", label.cfg.window_slack,
                      "Window length slack k in tokens")
      ->capture_default_str();

  SplitArgs split;
  auto* c_split = app.add_subcommand("split", "Seeded 80/10/10 split per source");
  c_split->add_option("--in", split.in, "Labeled JSONL")->capture_default_str();
  c_split->add_option("--out", split.out, "Split JSON")->capture_default_str();
  c_split->add_option("--seed", split.seed, "Shuffle seed")->capture_default_str();

  ExportArgs exp;
  auto* c_export = app.add_subcommand("export", "Write training or prediction-template files");
  c_export->add_option("--labeled", exp.labeled, "Labeled JSONL")->capture_default_str();
  c_export->add_option("--split", exp.split, "Split JSON")->capture_default_str();
  c_export->add_option("--part", exp.part, "train, validation or test")->capture_default_str();
  c_export->add_option("--format", exp.format, "extractive, abstractive or predictions-template")
      ->capture_default_str();
  c_export->add_option("--out", exp.out, "Output file ('-' for stdout)")->capture_default_str();
  c_export->add_option("--decisions", exp.decisions, "Review decision log to apply");
  c_export->add_flag("--include-flagged", exp.include_flagged, "Keep toxic/opinion posts");
  c_export->add_flag("--skip-unreviewed", exp.skip_unreviewed,
                     "Skip needs_review examples instead of failing");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Score prediction files against reference answers");
  c_eval->add_option("--labeled", eval.labeled, "Labeled JSONL")->capture_default_str();
  c_eval->add_option("--split", eval.split, "Split JSON")->capture_default_str();
  c_eval->add_option("--part", eval.part, "Split part to evaluate")->capture_default_str();
  c_eval->add_option("--predictions", eval.predictions, "[NAME=]PATH of a predictions JSONL")
      ->required();
  c_eval->add_option("--out", eval.out, "Raw result JSON")->capture_default_str();
  c_eval->add_option("--provider", eval.provider, "Embeddings: none, hash, lookup or http")
      ->capture_default_str();
  c_eval->add_option("--provider-seed", eval.provider_seed, "Seed for the hash provider")
      ->capture_default_str();
  c_eval->add_option("--provider-dim", eval.provider_dim, "Dimension for the hash provider")
      ->capture_default_str();
  c_eval->add_option("--lookup-file", eval.lookup_file, "JSONL {token, vector} for lookup");
  c_eval->add_option("--embed-url", eval.embed_url, "Base URL of an embedding service");
  c_eval->add_flag("--include-flagged", eval.include_flagged, "Keep toxic/opinion posts");

  ReportArgs report;
  auto* c_report = app.add_subcommand("report", "Render an eval result as a table");
  c_report->add_option("--in", report.in, "Raw result JSON")->capture_default_str();
  c_report->add_option("--format", report.format, "text, csv or jsonl")->capture_default_str();
  c_report->add_option("--out", report.out, "Output file ('-' for stdout)")->capture_default_str();

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve-review", "HTTP service for span review");
  c_serve->add_option("--labeled", serve.labeled, "Labeled JSONL")->capture_default_str();
  c_serve->add_option("--log", serve.log, "Append-only decision log")->capture_default_str();
  c_serve->add_option("--bind", serve.bind, "host:port (port 0 picks one)")
      ->capture_default_str();
  c_serve->add_option("--static-dir", serve.static_dir, "Serve UI assets from this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (c_ingest->parsed()) return run_ingest(ingest);
    if (c_clean->parsed()) return run_clean(clean);
    if (c_label->parsed()) return run_label(label);
    if (c_split->parsed()) return run_split(split);
    if (c_export->parsed()) return run_export(exp);
    if (c_eval->parsed()) return run_eval(eval);
    if (c_report->parsed()) return run_report(report);
    if (c_serve->parsed()) return run_serve(serve);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
