#include "biocom/neighbor_index.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <map>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "biocom/error.hpp"
#include "biocom/parallel.hpp"
#include "biocom/rng.hpp"
#include "biocom/simd/kernels.hpp"
#include "biocom/text.hpp"

namespace biocom {

using nlohmann::json;

void NeighborIndex::add(EmbeddingRecord record, std::span<const double> embedding) {
  if (embedding.size() != dim_) throw std::invalid_argument("embedding dimension does not match index");
  records_.push_back(std::move(record));
  matrix_.insert(matrix_.end(), embedding.begin(), embedding.end());
}

NeighborIndex build_index(const MentionEncoder& encoder, std::span<const LinkedSentence> store, unsigned threads) {
  struct Job {
    std::size_t sentence;
    std::size_t mention;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < store.size(); ++s) {
    for (std::size_t m = 0; m < store[s].mentions.size(); ++m) jobs.push_back({s, m});
  }
  if (jobs.empty()) throw Error("cannot build an index from an empty store");

  std::vector<Embedding> embeddings(jobs.size());
  std::vector<std::string> surfaces(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto& sentence = store[jobs[i].sentence];
    const auto& m = sentence.mentions[jobs[i].mention];
    embeddings[i] = encoder.encode(MentionInput::from_text(sentence.text, m.start, m.end));
    surfaces[i] = text::normalize_key(text::substr_chars(sentence.text, m.start, m.end), text::NormalizationPolicy{});
  });

  NeighborIndex index(encoder.dim(), encoder.fingerprint());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& sentence = store[jobs[i].sentence];
    index.add({sentence.mentions[jobs[i].mention].concept_id, sentence.doc_id, sentence.sent_id, jobs[i].mention, std::move(surfaces[i])},
              embeddings[i].values);
  }
  return index;
}

NeighborIndex build_index(const EncoderParams& params, std::span<const LinkedSentence> store, unsigned threads) {
  return build_index(HashingEncoder(params), store, threads);
}

NeighborIndex subsample_index(const NeighborIndex& index, std::size_t max_per_synonym, std::uint64_t seed) {
  if (max_per_synonym < 1) throw std::invalid_argument("max_per_synonym must be >= 1");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < index.size(); ++i) {
    auto [it, inserted] = groups.try_emplace(index.record(i).surface);
    if (inserted) order.push_back(index.record(i).surface);
    it->second.push_back(i);
  }
  Rng rng(seed);
  std::vector<char> keep(index.size(), 0);
  for (const auto& surface : order) {
    const auto& members = groups[surface];
    if (members.size() <= max_per_synonym) {
      for (std::size_t i : members) keep[i] = 1;
      continue;
    }
    for (std::size_t j : rng.sample_indices(members.size(), max_per_synonym)) keep[members[j]] = 1;
  }
  NeighborIndex out(index.dim(), index.fingerprint());
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (keep[i] != 0) out.add(index.record(i), index.embedding(i));
  }
  return out;
}

KnnResult knn_search(const NeighborIndex& index, std::span<const double> query, std::size_t k) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  if (query.size() != index.dim()) throw std::invalid_argument("query dimension does not match index");
  std::vector<double> sims(index.size());
  simd::matvec(index.matrix(), query, sims);

  KnnResult result;
  result.truncated = k > index.size();
  const std::size_t take = std::min(k, index.size());
  std::vector<std::size_t> order(index.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  auto better = [&](std::size_t a, std::size_t b) { return sims[a] != sims[b] ? sims[a] > sims[b] : a < b; };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(), better);
  result.neighbors.reserve(take);
  for (std::size_t i = 0; i < take; ++i) result.neighbors.push_back({order[i], sims[order[i]]});
  return result;
}

Prediction vote(const NeighborIndex& index, KnnResult knn) {
  std::map<ConceptId, Vote> tally;
  for (const auto& n : knn.neighbors) {
    const ConceptId& c = index.record(n.record).concept_id;
    auto& v = tally[c];
    v.concept_id = c;
    ++v.count;
    v.similarity_sum += n.similarity;
  }
  Prediction p;
  p.truncated = knn.truncated;
  p.neighbors = std::move(knn.neighbors);
  for (auto& [c, v] : tally) p.votes.push_back(std::move(v));
  std::sort(p.votes.begin(), p.votes.end(), [](const Vote& a, const Vote& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.similarity_sum != b.similarity_sum) return a.similarity_sum > b.similarity_sum;
    return a.concept_id < b.concept_id;
  });
  if (!p.votes.empty()) p.concept_id = p.votes.front().concept_id;
  return p;
}

Prediction predict_concept(const NeighborIndex& index, const MentionEncoder& encoder, const MentionInput& input, std::size_t k) {
  if (index.empty()) throw Error("cannot predict with an empty index");
  if (encoder.dim() != index.dim() || encoder.fingerprint() != index.fingerprint()) {
    throw Error("encoder does not match the index (fingerprint " + fingerprint_hex(encoder.fingerprint()) + " vs " +
                fingerprint_hex(index.fingerprint()) + ")");
  }
  const Embedding q = encoder.encode(input);
  return vote(index, knn_search(index, q.values, k));
}

Prediction predict_concept(const NeighborIndex& index, const EncoderParams& params, const MentionInput& input, std::size_t k) {
  return predict_concept(index, HashingEncoder(params), input, k);
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint));
  return buf;
}

void write_index(std::ostream& out, const NeighborIndex& index) {
  json header = {{"format", "biocom-index"},
                 {"version", 1},
                 {"d", index.dim()},
                 {"count", index.size()},
                 {"encoder_fingerprint", fingerprint_hex(index.fingerprint())}};
  out << header.dump() << '\n';
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto& r = index.record(i);
    const auto e = index.embedding(i);
    json j = {{"concept", r.concept_id.str()},
              {"embedding", std::vector<double>(e.begin(), e.end())},
              {"doc_id", r.doc_id},
              {"sent_id", r.sent_id},
              {"mention_index", r.mention_index},
              {"surface", r.surface}};
    out << j.dump() << '\n';
  }
  if (!out) throw Error("failed writing index");
}

NeighborIndex read_index(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  auto parse = [&](const std::string& l) {
    try {
      return json::parse(l);
    } catch (const json::parse_error& e) {
      throw ParseError(source, lineno, std::string("invalid JSON: ") + e.what());
    }
  };
  if (!std::getline(in, line)) throw ParseError(source, 0, "missing index header");
  ++lineno;
  const json header = parse(line);
  if (!header.is_object() || header.value("format", "") != "biocom-index") throw ParseError(source, lineno, "not an index header");
  NeighborIndex index(0, 0);
  std::size_t count = 0;
  try {
    if (header.at("version").get<int>() != 1) throw ParseError(source, lineno, "unsupported index version");
    index = NeighborIndex(header.at("d").get<std::size_t>(), std::stoull(header.at("encoder_fingerprint").get<std::string>(), nullptr, 16));
    count = header.at("count").get<std::size_t>();
  } catch (const json::exception& e) {
    throw ParseError(source, lineno, std::string("bad index header: ") + e.what());
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const json j = parse(line);
    try {
      EmbeddingRecord r{ConceptId(j.at("concept").get<std::string>()), j.at("doc_id").get<std::string>(),
                        j.at("sent_id").get<std::int64_t>(), j.at("mention_index").get<std::size_t>(),
                        j.at("surface").get<std::string>()};
      const auto e = j.at("embedding").get<std::vector<double>>();
      index.add(std::move(r), e);
    } catch (const json::exception& e) {
      throw ParseError(source, lineno, std::string("bad index record: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  if (index.size() != count) {
    throw ParseError(source, lineno, "header count " + std::to_string(count) + " but " + std::to_string(index.size()) + " records");
  }
  return index;
}

void save_index(const std::filesystem::path& path, const NeighborIndex& index) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write index " + path.string());
  write_index(out, index);
}

NeighborIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open index " + path.string());
  return read_index(in, path.string());
}

}  // namespace biocom
