// Copyright (c) 2026 The citss authors
// SPDX-License-Identifier: Apache-2.0

#include "citss/demo.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "citss/errors.hpp"
#include "citss/rng.hpp"

namespace citss::demo {
namespace {

using corpus::CitationContext;
using nlohmann::ordered_json;
using stk::StkMention;
using stk::StkType;

struct TypedPhrase {
  std::string surface;
  StkType type;
  int home_label;  // label the phrase correlates with in training data
};

const char* const kHeads[stk::kTypeCount][6] = {
    {"classification", "retrieval", "parsing", "summarization", "linking",
     "segmentation"},
    {"corpus", "treebank", "dataset", "lexicon", "benchmark", "collection"},
    {"network", "model", "encoder", "tagger", "classifier", "grammar"},
    {"pipeline", "procedure", "workflow", "protocol", "routine", "schedule"},
    {"score", "metric", "coefficient", "index", "ratio", "estimate"},
    {"structure", "phenomenon", "representation", "hypothesis", "constraint",
     "hierarchy"},
};

const char* const kModifiers[stk::kTypeCount][6] = {
    {"citation", "entity", "discourse", "crosslingual", "document", "aspect"},
    {"annotated", "parallel", "multilingual", "scholarly", "balanced",
     "curated"},
    {"recurrent", "probabilistic", "neural", "attentive", "graphical",
     "kernelized"},
    {"annotation", "training", "bootstrapping", "filtering", "decoding",
     "sampling"},
    {"agreement", "similarity", "perplexity", "coverage", "reliability",
     "stability"},
    {"latent", "semantic", "syntactic", "pragmatic", "compositional",
     "lexical"},
};

const std::vector<std::vector<std::string>>& citance_templates() {
  static const std::vector<std::vector<std::string>> templates = {
      // Background
      {"The first work to do this with {K} is #CITATION_TAG .",
       "Early studies of {K} are surveyed in #CITATION_TAG .",
       "#CITATION_TAG provides the standard reference on {K} .",
       "A broad literature on {K} has grown around #CITATION_TAG ."},
      // Compare/Contrast
      {"Unlike #CITATION_TAG , we treat {K} without supervision .",
       "Our handling of {K} differs from #CITATION_TAG in several ways .",
       "In contrast to #CITATION_TAG , the {K} is trained jointly here .",
       "The results of #CITATION_TAG on {K} disagree with ours ."},
      // Uses
      {"We use the {K} released by #CITATION_TAG .",
       "Our experiments run on the {K} of #CITATION_TAG .",
       "We apply the {K} from #CITATION_TAG without modification .",
       "The implementation relies on the {K} provided by #CITATION_TAG ."},
      // Motivation
      {"Motivated by #CITATION_TAG , we revisit the {K} .",
       "The difficulties with {K} reported by #CITATION_TAG motivate this "
       "study .",
       "Inspired by #CITATION_TAG , we study the {K} directly .",
       "This work is prompted by the observations on {K} in #CITATION_TAG ."},
      // Extend
      {"We extend the {K} of #CITATION_TAG with additional features .",
       "Building on #CITATION_TAG , we generalize the {K} .",
       "Our method augments the {K} introduced by #CITATION_TAG .",
       "We adapt and broaden the {K} from #CITATION_TAG ."},
      // Future
      {"Applying the {K} of #CITATION_TAG remains future work .",
       "We plan to combine our approach with the {K} from #CITATION_TAG .",
       "A promising direction is the {K} suggested by #CITATION_TAG .",
       "Future work will explore the {K} described in #CITATION_TAG ."},
  };
  return templates;
}

const std::vector<std::string>& noise_templates() {
  static const std::vector<std::string> templates = {
      "Related work on {K} is extensive [7] .",
      "Several groups have examined {K} in other domains (Lee, 2014) .",
      "The {K} has also been considered for low-resource settings [12] .",
      "An overview of {K} appears in standard textbooks .",
      "Other authors report mixed findings for {K} [3] .",
      "General background on {K} is omitted for brevity .",
      "Performance varies considerably across languages and domains .",
      "Details of preprocessing follow common practice [9] .",
  };
  return templates;
}

const std::vector<TypedPhrase>& phrase_pool() {
  static const std::vector<TypedPhrase> pool = [] {
    std::vector<TypedPhrase> phrases;
    int counter = 0;
    for (int t = 0; t < stk::kTypeCount; ++t)
      for (int h = 0; h < 6; ++h)
        for (int m = 0; m < 6; ++m) {
          TypedPhrase p;
          p.surface = std::string(kModifiers[t][m]) + " " + kHeads[t][h];
          p.type = stk::all_types()[t];
          p.home_label = counter++ % 6;
          phrases.push_back(std::move(p));
        }
    return phrases;
  }();
  return pool;
}

std::string substitute(std::string text, const std::string& phrase) {
  const auto pos = text.find("{K}");
  if (pos != std::string::npos) text.replace(pos, 3, phrase);
  return text;
}

std::vector<std::size_t> apportion(const std::array<double, 6>& mix, int total) {
  std::vector<std::size_t> counts(6, 0);
  double mix_sum = 0.0;
  for (double m : mix) mix_sum += m;
  std::vector<std::pair<double, int>> remainders;
  std::size_t assigned = 0;
  for (int c = 0; c < 6; ++c) {
    const double exact = total * mix[c] / mix_sum;
    counts[c] = static_cast<std::size_t>(exact);
    assigned += counts[c];
    remainders.emplace_back(exact - static_cast<double>(counts[c]), c);
  }
  std::sort(remainders.begin(), remainders.end(),
            [](auto a, auto b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < static_cast<std::size_t>(total); ++i, ++assigned)
    ++counts[remainders[i % remainders.size()].second];
  return counts;
}

const TypedPhrase& draw_phrase(Rng& rng, int label, double spurious,
                               bool decorrelate) {
  const auto& pool = phrase_pool();
  if (!decorrelate && rng.bernoulli(spurious)) {
    // Rejection-sample a phrase whose home label matches; the pool assigns
    // home labels round-robin so a sixth of all phrases qualifies.
    for (int attempt = 0; attempt < 64; ++attempt) {
      const TypedPhrase& p = pool[rng.uniform_index(pool.size())];
      if (p.home_label == label) return p;
    }
  }
  return pool[rng.uniform_index(pool.size())];
}

struct BuiltSample {
  CitationContext context;
  std::vector<StkMention> mentions;
};

BuiltSample build_sample(const DemoSpec& spec, Rng& rng, int label,
                         bool decorrelate) {
  BuiltSample out;
  const auto& templates = citance_templates()[label];
  const std::string tmpl = templates[rng.uniform_index(templates.size())];
  const TypedPhrase& key = draw_phrase(rng, label, spec.spurious, decorrelate);
  out.mentions.push_back({key.surface, key.type});
  const std::string citance = substitute(tmpl, key.surface);

  const int before = static_cast<int>(rng.uniform_index(spec.max_side + 1));
  const int after = static_cast<int>(rng.uniform_index(spec.max_side + 1));
  const auto make_noise = [&]() {
    const auto& pool = noise_templates();
    const std::string noise = pool[rng.uniform_index(pool.size())];
    if (noise.find("{K}") == std::string::npos) return noise;
    const TypedPhrase& p =
        phrase_pool()[rng.uniform_index(phrase_pool().size())];
    const bool already =
        std::any_of(out.mentions.begin(), out.mentions.end(),
                    [&](const StkMention& m) { return m.surface == p.surface; });
    if (!already) out.mentions.push_back({p.surface, p.type});
    return substitute(noise, p.surface);
  };
  for (int i = 0; i < before; ++i) out.context.sentences.push_back(make_noise());
  out.context.sentences.push_back(citance);
  out.context.citance_index = before;
  for (int i = 0; i < after; ++i) out.context.sentences.push_back(make_noise());

  int final_label = label;
  if (spec.label_noise > 0.0 && rng.bernoulli(spec.label_noise))
    final_label = static_cast<int>(rng.uniform_index(6));
  out.context.label = final_label;
  out.context.dataset = spec.shape;
  return out;
}

}  // namespace

DemoSpec DemoSpec::acl_arc() { return DemoSpec{}; }

DemoSpec DemoSpec::acl_arc_pool() {
  DemoSpec spec;
  spec.train = 1645;
  spec.validation = 0;
  spec.test = 284;
  return spec;
}

DemoSpec DemoSpec::focal() {
  DemoSpec spec;
  spec.shape = corpus::DatasetId::Focal;
  spec.train = 2617;
  spec.validation = 660;
  spec.test = 889;
  spec.label_mix = {0.412, 0.247, 0.003, 0.009, 0.058, 0.271};
  return spec;
}

DemoSpec DemoSpec::toy(int train_samples) {
  DemoSpec spec;
  spec.shape = corpus::DatasetId::Custom;
  spec.train = train_samples;
  spec.validation = std::max(2, train_samples / 4);
  spec.test = 0;
  spec.label_mix = {1, 1, 1, 1, 1, 1};
  spec.max_side = 2;
  spec.spurious = 0.6;
  spec.label_noise = 0.0;
  return spec;
}

DemoBundle generate(const DemoSpec& spec, std::uint64_t seed) {
  DemoBundle bundle;
  bundle.synonyms = demo_synonyms();
  Rng rng(derive_stream(seed, "demo-corpus", 0, to_string(spec.shape)));

  const auto emit = [&](int count, const char* split_name,
                        std::vector<CitationContext>& into, bool decorrelate) {
    const std::vector<std::size_t> counts = apportion(spec.label_mix, count);
    std::vector<BuiltSample> samples;
    for (int label = 0; label < 6; ++label)
      for (std::size_t i = 0; i < counts[label]; ++i)
        samples.push_back(build_sample(spec, rng, label, decorrelate));
    rng.shuffle(samples);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "demo-%s-%04zu", split_name, i);
      samples[i].context.sample_id = buf;
      if (std::string(split_name) == "train")
        bundle.stk.add_sample(buf, samples[i].mentions);
      into.push_back(std::move(samples[i].context));
    }
  };

  emit(spec.train, "train", bundle.split.train, false);
  emit(spec.validation, "validation", bundle.split.validation, true);
  emit(spec.test, "test", bundle.split.test, true);
  return bundle;
}

namespace {

const std::vector<std::pair<std::string, std::vector<std::string>>>&
synonym_entries() {
  static const std::vector<std::pair<std::string, std::vector<std::string>>>
      entries = {
          {"studies", {"analyses", "surveys"}},
          {"broad", {"wide", "extensive"}},
          {"several", {"multiple", "various"}},
          {"standard", {"typical", "conventional"}},
          {"difficulties", {"challenges", "problems"}},
          {"promising", {"encouraging", "attractive"}},
          {"additional", {"extra", "supplementary"}},
          {"observations", {"findings", "remarks"}},
          {"experiments", {"trials", "evaluations"}},
          {"implementation", {"realization", "codebase"}},
          {"approach", {"method", "strategy"}},
          {"direction", {"avenue", "path"}},
          {"released", {"published", "distributed"}},
          {"provided", {"supplied", "offered"}},
          {"described", {"detailed", "presented"}},
          {"reported", {"documented", "noted"}},
          {"suggested", {"proposed", "recommended"}},
          {"introduced", {"presented", "devised"}},
          {"examined", {"studied", "analyzed"}},
          {"considered", {"explored", "evaluated"}},
          {"extensive", {"substantial", "sizable"}},
          {"mixed", {"varied", "inconsistent"}},
          {"common", {"usual", "widespread"}},
          {"work", {"effort", "research"}},
          {"results", {"findings", "outcomes"}},
          {"performance", {"effectiveness", "quality"}},
      };
  return entries;
}

}  // namespace

augment::SynonymBase demo_synonyms() {
  augment::SynonymBase base;
  for (const auto& [word, synonyms] : synonym_entries())
    base.add(word, synonyms);
  return base;
}

void write_bundle(const DemoBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  corpus::save_dataset(bundle.split, (dir / "corpus.jsonl").string());
  bundle.stk.save((dir / "stk_base.json").string());

  const std::filesystem::path cache_dir = dir / "stk_cache";
  std::filesystem::create_directories(cache_dir);
  for (const auto& ctx : bundle.split.train) {
    const std::string prompt = stk::build_extraction_prompt(ctx);
    const std::uint64_t hash = stk::prompt_hash(prompt);
    ordered_json reply_body;
    for (const auto& m : bundle.stk.mentions_for(ctx.sample_id))
      reply_body[stk::to_string(m.type)].push_back(m.surface);

    ordered_json j;
    j["id"] = ctx.sample_id;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(hash));
    j["prompt_hash"] = buf;
    j["raw"] = reply_body.dump();
    ordered_json list = ordered_json::array();
    for (const auto& m : bundle.stk.mentions_for(ctx.sample_id))
      list.push_back({{"surface", m.surface}, {"type", stk::to_string(m.type)}});
    j["mentions"] = std::move(list);
    std::ofstream out(stk::cache_file(cache_dir, ctx.sample_id, hash));
    if (!out) throw Error("cannot write demo cache entry");
    out << j.dump(2) << "\n";
  }

  ordered_json synonyms;
  synonyms["synonyms"] = ordered_json::object();
  for (const auto& [word, list] : synonym_entries())
    synonyms["synonyms"][word] = list;
  std::ofstream out(dir / "synonyms.json");
  out << synonyms.dump(2) << "\n";
}

}  // namespace citss::demo
