#include <algorithm>
#include <functional>
#include <string>
#include <vector>

#include "catkb/metrics.hpp"

namespace catkb {

namespace {

bool is_vowel_letter(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::vector<bool> consonant_flags(const std::string& w) {
  std::vector<bool> flags(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (is_vowel_letter(w[i])) {
      flags[i] = false;
    } else if (w[i] == 'y') {
      flags[i] = i == 0 ? true : !flags[i - 1];
    } else {
      flags[i] = true;
    }
  }
  return flags;
}

bool is_consonant(const std::string& w, std::size_t i) { return consonant_flags(w)[i]; }

int measure(const std::string& stem) {
  const auto flags = consonant_flags(stem);
  int m = 0;
  for (std::size_t i = 1; i < flags.size(); ++i) {
    if (!flags[i - 1] && flags[i]) ++m;
  }
  return m;
}

bool contains_vowel(const std::string& stem) {
  const auto flags = consonant_flags(stem);
  return std::find(flags.begin(), flags.end(), false) != flags.end();
}

bool ends_double_consonant(const std::string& w) {
  const std::size_t n = w.size();
  return n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1);
}

bool ends_cvc(const std::string& w) {
  const std::size_t n = w.size();
  if (n < 3) return false;
  const auto flags = consonant_flags(w);
  return flags[n - 3] && !flags[n - 2] && flags[n - 1] && w[n - 1] != 'w' && w[n - 1] != 'x' &&
         w[n - 1] != 'y';
}

bool ends_with(const std::string& w, std::string_view suffix) {
  return w.size() >= suffix.size() &&
         std::string_view(w).substr(w.size() - suffix.size()) == suffix;
}

struct Rule {
  std::string_view suffix;
  std::string_view replacement;
  std::function<bool(const std::string&)> condition;  // empty: unconditional
};

// The first rule whose suffix matches decides; a failed condition stops the step.
std::string apply_rules(const std::string& w, const std::vector<Rule>& rules) {
  for (const auto& r : rules) {
    if (!ends_with(w, r.suffix)) continue;
    const std::string stem = w.substr(0, w.size() - r.suffix.size());
    if (!r.condition || r.condition(stem)) return stem + std::string(r.replacement);
    return w;
  }
  return w;
}

bool m_positive(const std::string& s) { return measure(s) > 0; }
bool m_above_one(const std::string& s) { return measure(s) > 1; }

std::string step1a(const std::string& w) {
  return apply_rules(w, {{"sses", "ss", {}}, {"ies", "i", {}}, {"ss", "ss", {}}, {"s", "", {}}});
}

std::string step1b(const std::string& w) {
  if (ends_with(w, "eed")) {
    const std::string stem = w.substr(0, w.size() - 3);
    return measure(stem) > 0 ? stem + "ee" : w;
  }
  std::string stem;
  bool stripped = false;
  for (std::string_view suffix : {std::string_view("ed"), std::string_view("ing")}) {
    if (ends_with(w, suffix)) {
      stem = w.substr(0, w.size() - suffix.size());
      if (contains_vowel(stem)) {
        stripped = true;
        break;
      }
    }
  }
  if (!stripped) return w;
  if (ends_with(stem, "at")) return stem + "e";
  if (ends_with(stem, "bl")) return stem + "e";
  if (ends_with(stem, "iz")) return stem + "e";
  if (ends_double_consonant(stem)) {
    const char last = stem.back();
    if (last != 'l' && last != 's' && last != 'z') return stem.substr(0, stem.size() - 1);
    return stem;
  }
  if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
  return stem;
}

std::string step1c(const std::string& w) { return apply_rules(w, {{"y", "i", contains_vowel}}); }

std::string step2(const std::string& w) {
  static const std::vector<Rule> rules{
      {"ational", "ate", m_positive}, {"tional", "tion", m_positive},
      {"enci", "ence", m_positive},   {"anci", "ance", m_positive},
      {"izer", "ize", m_positive},    {"abli", "able", m_positive},
      {"alli", "al", m_positive},     {"entli", "ent", m_positive},
      {"eli", "e", m_positive},       {"ousli", "ous", m_positive},
      {"ization", "ize", m_positive}, {"ation", "ate", m_positive},
      {"ator", "ate", m_positive},    {"alism", "al", m_positive},
      {"iveness", "ive", m_positive}, {"fulness", "ful", m_positive},
      {"ousness", "ous", m_positive}, {"aliti", "al", m_positive},
      {"iviti", "ive", m_positive},   {"biliti", "ble", m_positive},
  };
  return apply_rules(w, rules);
}

std::string step3(const std::string& w) {
  static const std::vector<Rule> rules{
      {"icate", "ic", m_positive}, {"ative", "", m_positive}, {"alize", "al", m_positive},
      {"iciti", "ic", m_positive}, {"ical", "ic", m_positive}, {"ful", "", m_positive},
      {"ness", "", m_positive},
  };
  return apply_rules(w, rules);
}

std::string step4(const std::string& w) {
  static const std::vector<Rule> rules{
      {"al", "", m_above_one},    {"ance", "", m_above_one}, {"ence", "", m_above_one},
      {"er", "", m_above_one},    {"ic", "", m_above_one},   {"able", "", m_above_one},
      {"ible", "", m_above_one},  {"ant", "", m_above_one},  {"ement", "", m_above_one},
      {"ment", "", m_above_one},  {"ent", "", m_above_one},
      {"ion", "",
       [](const std::string& s) {
         return measure(s) > 1 && (s.back() == 's' || s.back() == 't');
       }},
      {"ou", "", m_above_one},    {"ism", "", m_above_one},  {"ate", "", m_above_one},
      {"iti", "", m_above_one},   {"ous", "", m_above_one},  {"ive", "", m_above_one},
      {"ize", "", m_above_one},
  };
  return apply_rules(w, rules);
}

std::string step5a(const std::string& w) {
  if (!ends_with(w, "e")) return w;
  const std::string stem = w.substr(0, w.size() - 1);
  const int m = measure(stem);
  if (m > 1 || (m == 1 && !ends_cvc(stem))) return stem;
  return w;
}

std::string step5b(const std::string& w) {
  if (ends_with(w, "ll") && measure(w.substr(0, w.size() - 1)) > 1) {
    return w.substr(0, w.size() - 1);
  }
  return w;
}

}  // namespace

std::string porter_stem(std::string_view word) {
  std::string w(word);
  if (w.empty() || !std::all_of(w.begin(), w.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
    return w;
  }
  w = step1a(w);
  w = step1b(w);
  w = step1c(w);
  w = step2(w);
  w = step3(w);
  w = step4(w);
  w = step5a(w);
  w = step5b(w);
  return w;
}

}  // namespace catkb
