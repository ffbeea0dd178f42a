#include "biocom/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "biocom/config.hpp"
#include "biocom/corpus.hpp"
#include "biocom/dictionary.hpp"
#include "biocom/encoder.hpp"
#include "biocom/error.hpp"
#include "biocom/evaluation.hpp"
#include "biocom/neighbor_index.hpp"
#include "biocom/simd/kernels.hpp"
#include "biocom/synthetic.hpp"
#include "biocom/trainer.hpp"

#ifndef BIOCOM_VERSION
#define BIOCOM_VERSION "0.0.0"
#endif

namespace biocom {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

/// Output stream that is either the caller's stream or a file.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot write " + path);
      stream_ = file_.get();
    }
  }
  std::ostream& get() { return *stream_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* stream_ = nullptr;
};

class Source {
 public:
  Source(const std::string& path, std::istream& fallback) : name_(path.empty() || path == "-" ? "<stdin>" : path) {
    if (path.empty() || path == "-") {
      stream_ = &fallback;
    } else {
      file_ = std::make_unique<std::ifstream>(path, std::ios::binary);
      if (!*file_) throw Error("cannot open " + path);
      stream_ = file_.get();
    }
  }
  std::istream& get() { return *stream_; }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::unique_ptr<std::ifstream> file_;
  std::istream* stream_ = nullptr;
};

struct Globals {
  bool json = false;
  unsigned threads = 1;
};

std::string fixed(double v, int digits = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

PipelineConfig load_pipeline(const std::string& path) {
  return path.empty() ? PipelineConfig{} : PipelineConfig::from(ConfigFile::load(path));
}

std::vector<LinkedSentence> filter_by_dictionary(std::vector<LinkedSentence> linked, const Dictionary& dict) {
  std::vector<LinkedSentence> out;
  for (auto& s : linked) {
    std::erase_if(s.mentions, [&](const MentionSpan& m) { return !dict.contains(m.concept_id); });
    if (!s.mentions.empty()) out.push_back(std::move(s));
  }
  return out;
}

// ---- dict -----------------------------------------------------------------

void add_dict(CLI::App& app, const Globals& g, std::istream&, std::ostream& out, std::ostream&) {
  auto* dict = app.add_subcommand("dict", "Dictionary statistics and downsampling");
  dict->require_subcommand(1);

  auto* stats = dict->add_subcommand("stats", "Concept and synonym counts");
  auto path = std::make_shared<std::string>();
  stats->add_option("--dict", *path, "concept<TAB>synonym file")->required();
  stats->callback([path, &g, &out] {
    const auto s = load_dictionary(*path).stats();
    if (g.json) {
      out << json{{"concepts", s.concepts}, {"synonyms", s.synonyms}, {"mean_synonyms_per_concept", s.mean_synonyms_per_concept}}.dump()
          << '\n';
    } else {
      out << "concepts\t" << s.concepts << "\nsynonyms\t" << s.synonyms << "\nmean_synonyms_per_concept\t"
          << fixed(s.mean_synonyms_per_concept, 4) << '\n';
    }
  });

  auto* down = dict->add_subcommand("downsample", "Keep ceil(F * n) synonyms per concept");
  struct DownArgs {
    std::string dict, out;
    double fraction = 0.5;
    std::uint64_t seed = 0;
  };
  auto a = std::make_shared<DownArgs>();
  down->add_option("--dict", a->dict)->required();
  down->add_option("--fraction", a->fraction, "fraction in (0, 1]")->required();
  down->add_option("--seed", a->seed)->required();
  down->add_option("--out", a->out, "output TSV (default stdout)");
  down->callback([a, &out] {
    const auto result = downsample_synonyms(load_dictionary(a->dict), a->fraction, a->seed);
    Sink sink(a->out, out);
    write_dictionary(sink.get(), result);
  });
}

// ---- synth ----------------------------------------------------------------

void add_synth(CLI::App& app, const Globals& g, std::istream&, std::ostream& out, std::ostream&) {
  auto* cmd = app.add_subcommand("synth", "Generate a seeded synthetic dictionary and corpus");
  struct Args {
    std::string spec, out;
    std::optional<std::uint64_t> seed;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--spec", a->spec, "config file with a [synth] section");
  cmd->add_option("--out", a->out, "output directory")->required();
  cmd->add_option("--seed", a->seed, "overrides synth.seed");
  cmd->callback([a, &g, &out] {
    SynthSpec spec = load_pipeline(a->spec).synth;
    if (a->seed) spec.seed = *a->seed;
    const auto data = generate(spec);
    write_synth(data, a->out);
    if (g.json) {
      out << json::parse(manifest_json(data)).dump() << '\n';
    } else {
      out << "wrote " << data.manifest.sentences << " sentences, " << data.manifest.heldout_mentions << " held-out mentions to "
          << a->out << '\n';
    }
  });
}

// ---- link -----------------------------------------------------------------

void add_link(CLI::App& app, const Globals& g, std::istream& in, std::ostream& out, std::ostream& err) {
  auto* cmd = app.add_subcommand("link", "Dictionary-link raw sentences (JSONL in, JSONL out)");
  struct Args {
    std::string dict, mode = "all", exclude, in, out;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--dict", a->dict)->required();
  cmd->add_option("--mode", a->mode, "all|one")->check(CLI::IsMember({"all", "one"}));
  cmd->add_option("--exclude-docs", a->exclude, "file of doc ids to drop");
  cmd->add_option("--in", a->in, "raw sentences (default stdin)");
  cmd->add_option("--out", a->out, "linked sentences (default stdout)");
  cmd->callback([a, &g, &in, &out, &err] {
    const Matcher matcher(load_dictionary(a->dict));
    std::set<std::string> exclude;
    if (!a->exclude.empty()) {
      Source ids(a->exclude, in);
      exclude = read_id_list(ids.get());
    }
    Source src(a->in, in);
    Sink sink(a->out, out);
    const auto s = link_stream(matcher, src.get(), sink.get(), parse_link_mode(a->mode), exclude, g.threads, src.name());
    const json summary{{"read", s.read}, {"excluded", s.excluded}, {"unmatched", s.unmatched}, {"emitted", s.emitted}};
    err << "link: " << summary.dump() << '\n';
  });
}

// ---- train ----------------------------------------------------------------

void add_train(CLI::App& app, const Globals& g, std::istream&, std::ostream& out, std::ostream& err) {
  auto* cmd = app.add_subcommand("train", "Train the mention encoder with the multi-similarity loss");
  struct Args {
    std::string linked, dict, config, out, loss_csv;
    std::optional<std::size_t> steps;
    std::optional<std::uint64_t> seed;
    std::optional<double> lr;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--linked", a->linked, "linked corpus JSONL")->required();
  cmd->add_option("--dict", a->dict, "keep only mentions of these concepts");
  cmd->add_option("--config", a->config, "config file ([train], [loss], [encoder])");
  cmd->add_option("--out", a->out, "model file")->required();
  cmd->add_option("--loss-csv", a->loss_csv, "loss curve CSV (default <out>.loss.csv)");
  cmd->add_option("--steps", a->steps);
  cmd->add_option("--seed", a->seed);
  cmd->add_option("--lr", a->lr);
  cmd->callback([a, &g, &out, &err] {
    PipelineConfig cfg = load_pipeline(a->config);
    if (a->steps) cfg.train.steps = *a->steps;
    if (a->seed) cfg.train.seed = *a->seed;
    if (a->lr) cfg.train.learning_rate = *a->lr;
    if (g.threads > 1) cfg.train.threads = g.threads;
    cfg.train.validate();

    auto linked = load_linked_sentences(a->linked);
    if (!a->dict.empty()) linked = filter_by_dictionary(std::move(linked), load_dictionary(a->dict));
    const std::size_t min_sentences = cfg.min_sentences == 0 ? cfg.train.sentences_per_concept : cfg.min_sentences;
    const auto pool = build_pool(linked, std::max(min_sentences, cfg.train.sentences_per_concept));
    err << "train: pool of " << pool.size() << " concepts (" << pool.dropped_concepts << " dropped)\n";

    const auto result = train(pool, EncoderParams::random(cfg.encoder, cfg.init_seed), cfg.train);
    save_model(a->out, result.params);
    const std::string csv_path = a->loss_csv.empty() ? a->out + ".loss.csv" : a->loss_csv;
    {
      Sink csv(csv_path, out);
      csv.get() << "step,loss\n";
      csv.get() << std::setprecision(17);
      for (std::size_t i = 0; i < result.loss_curve.size(); ++i) csv.get() << i << ',' << result.loss_curve[i] << '\n';
    }
    ordered_json manifest;
    manifest["fingerprint"] = fingerprint_hex(result.params.fingerprint());
    manifest["encoder"] = {{"dim", cfg.encoder.dim}, {"feature_dim", cfg.encoder.feature_dim}, {"window", cfg.encoder.window},
                           {"hash_seed", cfg.encoder.hash_seed}, {"init_seed", cfg.init_seed}};
    manifest["train"] = {{"concepts_per_batch", cfg.train.concepts_per_batch},
                         {"sentences_per_concept", cfg.train.sentences_per_concept},
                         {"learning_rate", cfg.train.learning_rate},
                         {"steps", cfg.train.steps},
                         {"seed", cfg.train.seed}};
    manifest["loss"] = {{"alpha", cfg.train.loss.alpha}, {"beta", cfg.train.loss.beta}, {"lambda", cfg.train.loss.lambda},
                        {"epsilon", cfg.train.loss.epsilon}};
    manifest["pool"] = {{"concepts", pool.size()}, {"dropped", pool.dropped_concepts}};
    {
      std::ofstream mf(a->out + ".json");
      mf << manifest.dump(2) << '\n';
    }
    const double first = result.loss_curve.empty() ? 0.0 : result.loss_curve.front();
    const double last = result.loss_curve.empty() ? 0.0 : result.loss_curve.back();
    if (g.json) {
      out << json{{"model", a->out}, {"steps", result.loss_curve.size()}, {"first_loss", first}, {"last_loss", last},
                  {"fingerprint", fingerprint_hex(result.params.fingerprint())}}
                 .dump()
          << '\n';
    } else {
      out << "trained " << result.loss_curve.size() << " steps, loss " << fixed(first) << " -> " << fixed(last) << '\n';
    }
  });
}

// ---- index ----------------------------------------------------------------

void add_index(CLI::App& app, const Globals& g, std::istream&, std::ostream& out, std::ostream& err) {
  auto* cmd = app.add_subcommand("index", "Build or subsample a neighbor index");
  cmd->require_subcommand(1);

  auto* build = cmd->add_subcommand("build", "Embed every linked mention");
  struct BuildArgs {
    std::string linked, model, out;
  };
  auto b = std::make_shared<BuildArgs>();
  build->add_option("--linked", b->linked)->required();
  build->add_option("--model", b->model)->required();
  build->add_option("--out", b->out, "index file (default stdout)");
  build->callback([b, &g, &out, &err] {
    const auto params = load_model(b->model);
    const auto linked = load_linked_sentences(b->linked);
    const auto index = build_index(params, linked, g.threads);
    Sink sink(b->out, out);
    write_index(sink.get(), index);
    err << "index: " << index.size() << " records, fingerprint " << fingerprint_hex(index.fingerprint()) << '\n';
  });

  auto* sub = cmd->add_subcommand("subsample", "Cap records per synonym surface");
  struct SubArgs {
    std::string index, out;
    std::size_t cap = 1;
    std::uint64_t seed = 0;
  };
  auto s = std::make_shared<SubArgs>();
  sub->add_option("--index", s->index)->required();
  sub->add_option("--cap", s->cap)->required()->check(CLI::PositiveNumber);
  sub->add_option("--seed", s->seed)->required();
  sub->add_option("--out", s->out, "index file (default stdout)");
  sub->callback([s, &out, &err] {
    const auto index = subsample_index(load_index(s->index), s->cap, s->seed);
    Sink sink(s->out, out);
    write_index(sink.get(), index);
    err << "index: kept " << index.size() << " records (cap " << s->cap << ", seed " << s->seed << ")\n";
  });
}

// ---- predict --------------------------------------------------------------

void add_predict(CLI::App& app, const Globals& g, std::istream& in, std::ostream& out, std::ostream&) {
  auto* cmd = app.add_subcommand("predict", "Normalize mentions by kNN majority vote");
  struct Args {
    std::string index, model, in, out;
    std::size_t k = kDefaultNeighbors;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--index", a->index)->required();
  cmd->add_option("--model", a->model)->required();
  cmd->add_option("--k", a->k, "neighbors")->check(CLI::PositiveNumber);
  cmd->add_option("--in", a->in, "sentences with mention spans, JSONL (default stdin)");
  cmd->add_option("--out", a->out, "predictions JSONL (default stdout)");
  cmd->callback([a, &g, &in, &out] {
    const auto params = load_model(a->model);
    const auto index = load_index(a->index);
    const HashingEncoder encoder(params);
    Source src(a->in, in);
    Sink sink(a->out, out);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(src.get(), line)) {
      ++lineno;
      if (line.empty()) continue;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError(src.name(), lineno, e.what());
      }
      const std::string text = j.at("text").get<std::string>();
      for (const auto& m : j.at("mentions")) {
        const auto start = m.at("start").get<std::size_t>();
        const auto end = m.at("end").get<std::size_t>();
        const auto p = predict_concept(index, encoder, MentionInput::from_text(text, start, end), a->k);
        json votes = json::array();
        for (const auto& v : p.votes) votes.push_back({{"concept", v.concept_id.str()}, {"count", v.count}, {"similarity_sum", v.similarity_sum}});
        json neighbors = json::array();
        for (const auto& n : p.neighbors) {
          const auto& r = index.record(n.record);
          neighbors.push_back({{"concept", r.concept_id.str()}, {"similarity", n.similarity}, {"doc_id", r.doc_id}, {"sent_id", r.sent_id}});
        }
        sink.get() << json{{"doc_id", j.value("doc_id", "")},
                           {"sent_id", j.value("sent_id", std::int64_t{0})},
                           {"start", start},
                           {"end", end},
                           {"concept", p.concept_id.str()},
                           {"truncated", p.truncated},
                           {"votes", std::move(votes)},
                           {"neighbors", std::move(neighbors)}}
                          .dump()
                   << '\n';
      }
    }
  });
}

// ---- eval -----------------------------------------------------------------

void add_eval(CLI::App& app, const Globals& g, std::istream&, std::ostream& out, std::ostream& err) {
  auto* cmd = app.add_subcommand("eval", "Accuracy on gold mentions");
  struct Args {
    std::string gold, index, model, baseline, dict, confusion;
    std::size_t k = kDefaultNeighbors;
  };
  auto a = std::make_shared<Args>();
  cmd->add_option("--gold", a->gold)->required();
  cmd->add_option("--index", a->index);
  cmd->add_option("--model", a->model);
  cmd->add_option("--k", a->k)->check(CLI::PositiveNumber);
  cmd->add_option("--baseline", a->baseline, "tfidf")->check(CLI::IsMember({"tfidf"}));
  cmd->add_option("--dict", a->dict, "drops gold concepts outside the dictionary; required by --baseline");
  cmd->add_option("--confusion", a->confusion, "write (gold, predicted, count) CSV here");
  cmd->callback([a, &g, &out, &err] {
    const bool knn = !a->index.empty() || !a->model.empty();
    if (knn && (a->index.empty() || a->model.empty())) throw CLI::ValidationError("--index and --model go together");
    if (!knn && a->baseline.empty()) throw CLI::ValidationError("need --index/--model or --baseline");
    if (!a->baseline.empty() && a->dict.empty()) throw CLI::ValidationError("--baseline tfidf needs --dict");

    auto gold = load_gold(a->gold);
    std::optional<Dictionary> dict;
    if (!a->dict.empty()) {
      dict = load_dictionary(a->dict);
      const std::size_t before = gold.size();
      gold = filter_gold(gold, *dict);
      err << "eval: kept " << gold.size() << " of " << before << " gold mentions\n";
    }

    ordered_json report;
    report["mentions"] = gold.size();
    std::vector<ConceptId> predictions;
    if (knn) {
      const auto params = load_model(a->model);
      const auto index = load_index(a->index);
      predictions = predict_gold(index, params, gold, a->k, g.threads);
      report["k"] = a->k;
      report["accuracy"] = evaluate_accuracy(predictions, gold);
    }
    if (!a->baseline.empty()) {
      const auto model = tfidf_fit(*dict);
      std::vector<ConceptId> base;
      base.reserve(gold.size());
      for (const auto& m : gold) base.push_back(tfidf_predict(model, text::substr_chars(m.text, m.start, m.end)));
      report["tfidf_accuracy"] = evaluate_accuracy(base, gold);
      if (!knn) predictions = std::move(base);
    }
    if (!a->confusion.empty()) {
      Sink csv(a->confusion, out);
      write_confusion_csv(csv.get(), confusion_counts(predictions, gold));
    }
    if (g.json) {
      out << report.dump() << '\n';
    } else {
      for (const auto& [key, value] : report.items()) {
        out << key << '\t' << (value.is_number_float() ? fixed(value.get<double>()) : value.dump()) << '\n';
      }
    }
  });
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"biocom: context-matching entity normalization"};
  app.name("biocom");
  app.set_version_flag("--version", std::string("biocom ") + BIOCOM_VERSION + " (simd: " + std::string(simd::isa_name(simd::active_isa())) + ")");
  app.require_subcommand(1);
  Globals g;
  app.add_flag("--json", g.json, "machine-readable output")->configurable(false);
  app.add_option("--threads", g.threads, "worker threads for per-sentence stages")->check(CLI::PositiveNumber);
  app.fallthrough();

  add_dict(app, g, in, out, err);
  add_synth(app, g, in, out, err);
  add_link(app, g, in, out, err);
  add_train(app, g, in, out, err);
  add_index(app, g, in, out, err);
  add_predict(app, g, in, out, err);
  add_eval(app, g, in, out, err);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    app.exit(e, out, err);
    return 2;
  } catch (const Error& e) {
    err << "biocom: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "biocom: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace biocom
