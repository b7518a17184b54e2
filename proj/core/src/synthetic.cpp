#include "qfsum/synthetic.hpp"

#include <array>
#include <cmath>
#include <string>

#include "qfsum/error.hpp"
#include "qfsum/qahead.hpp"

namespace qfsum {
namespace {

constexpr std::array<std::string_view, 16> kSyllables = {"ka", "lo", "mi", "ne", "ra", "to", "su", "vi",
                                                         "da", "pe", "xo", "ly", "zu", "gri", "fen", "bor"};
constexpr std::array<std::string_view, 6> kCommon = {"of", "in", "and", "with", "was", "is"};
constexpr std::array<std::string_view, 6> kOffTopic = {"a", "on", "for", "by", "at", "to"};

std::string make_word(SeededRng& rng, std::size_t syllables) {
  std::string w;
  for (std::size_t i = 0; i < syllables; ++i) w += kSyllables[rng.below(kSyllables.size())];
  return w;
}

std::vector<std::string> make_pool(SeededRng& rng, std::size_t size, std::string_view suffix) {
  std::vector<std::string> pool;
  while (pool.size() < size) {
    std::string w = make_word(rng, 2 + rng.below(2));
    w += suffix;
    bool dup = false;
    for (const auto& p : pool) dup = dup || p == w;
    if (!dup) pool.push_back(std::move(w));
  }
  return pool;
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

// Relevant sentences mention the topic; distractors share no token with them.
std::string make_sentence(SeededRng& rng, const std::vector<std::string>& pool, const std::string* topic,
                          std::size_t content_words) {
  const auto& function_words = topic != nullptr ? kCommon : kOffTopic;
  std::vector<std::string> words;
  if (topic != nullptr) {
    words.emplace_back("the");
    words.push_back(*topic);
  }
  for (std::size_t i = 0; i < content_words; ++i) {
    words.push_back(pool[rng.below(pool.size())]);
    if (i % 2 == 1) words.emplace_back(function_words[rng.below(function_words.size())]);
  }
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out.push_back(' ');
    out += w;
  }
  return capitalize(out) + ".";
}

}  // namespace

std::vector<TrainingExample> make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.relevant < 1) throw Error(ErrorKind::invalid_argument, "synthetic questions need relevant snippets");
  for (const auto& [type, n] : spec.relevant_per_type) {
    if (n < 1) throw Error(ErrorKind::invalid_argument, "synthetic questions need relevant snippets");
  }
  if (!(spec.inverted_fraction >= 0.0 && spec.inverted_fraction <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "inverted_fraction must lie in [0, 1]");
  }
  SeededRng rng(spec.seed);
  const auto relevant_pool = make_pool(rng, 40, "in");
  const auto filler_pool = make_pool(rng, 60, "a");
  const auto inverted = static_cast<std::size_t>(std::floor(spec.inverted_fraction * spec.questions + 1e-9));
  constexpr std::array<QuestionType, 4> kTypes = {QuestionType::summary, QuestionType::factoid,
                                                  QuestionType::yesno, QuestionType::list};

  std::vector<TrainingExample> out;
  out.reserve(spec.questions);
  for (std::size_t q = 0; q < spec.questions; ++q) {
    TrainingExample ex;
    const std::string topic = make_word(rng, 3) + "ol";
    ex.question.id = "syn" + std::to_string(q + 1);
    ex.question.qtype = kTypes[q % kTypes.size()];
    ex.question.body = "What is known about " + topic + " " + relevant_pool[rng.below(relevant_pool.size())] + "?";

    struct Draft {
      std::string text;
      bool relevant;
    };
    std::vector<Draft> drafts;
    const auto per_type = spec.relevant_per_type.find(ex.question.qtype);
    const std::size_t relevant = per_type != spec.relevant_per_type.end() ? per_type->second : spec.relevant;
    for (std::size_t i = 0; i < relevant; ++i) {
      drafts.push_back({make_sentence(rng, relevant_pool, &topic, 6), true});
    }
    for (std::size_t i = 0; i < spec.distractors; ++i) {
      drafts.push_back({make_sentence(rng, filler_pool, nullptr, 6), false});
    }
    rng.shuffle(drafts);

    const bool flip = q < inverted;
    std::vector<int> labels;
    std::string answer;
    const std::string doc_id = "doc-" + ex.question.id;
    for (const auto& d : drafts) {
      ex.snippets.push_back(SnippetRef{doc_id, d.text, static_cast<int>(ex.snippets.size()) + 1});
      labels.push_back((d.relevant != flip) ? 1 : 0);
      if (d.relevant) {
        if (!answer.empty()) answer.push_back(' ');
        answer += d.text;
      }
    }
    ex.ideal_answers.push_back(std::move(answer));
    if (spec.with_labels) ex.labels = std::move(labels);
    ex.documents.push_back(doc_id);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<Document> make_synthetic_corpus(const std::vector<TrainingExample>& examples) {
  std::vector<Document> docs;
  for (const auto& ex : examples) {
    Document d;
    d.id = ex.snippets.empty() ? "doc-" + ex.question.id : ex.snippets.front().document_id;
    d.title = "Report on " + ex.question.body.substr(20, ex.question.body.size() - 21);
    for (const auto& s : ex.snippets) {
      if (!d.text.empty()) d.text.push_back(' ');
      d.text += s.text;
    }
    docs.push_back(std::move(d));
  }
  return docs;
}

}  // namespace qfsum
