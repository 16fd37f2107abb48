#pragma once

// Group vocabulary by pointwise mutual information with a significance
// filter. Probabilities are token rates.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "csv.hpp"
#include "date.hpp"
#include "errors.hpp"
#include "io.hpp"
#include "network.hpp"

namespace polarnet {

struct CommentRecord {
    NodeIndex author = 0;
    Date timestamp;
    std::string text;
};

/// Comments CSV `author,date,text` (header optional). Authors must be
/// registered nodes.
inline std::vector<CommentRecord> read_comments(std::istream& in, const std::string& source_name,
                                                const NodeRegistry& registry) {
    csv::Reader reader(in, source_name);
    csv::Row row;
    std::vector<CommentRecord> out;
    bool first = true;
    while (reader.next(row)) {
        auto& f = row.fields;
        if (first) {
            first = false;
            if (f.size() == 3 && detail::lower(csv::trim(f[0])) == "author") continue;
        }
        if (f.size() != 3) throw ParseError(source_name, row.line, "expected author,date,text");
        const auto author = registry.find(csv::trim(f[0]));
        if (!author)
            throw ValidationError(source_name + ":" + std::to_string(row.line) + ": unknown author '" +
                                  std::string(csv::trim(f[0])) + "'");
        const auto date = Date::parse(csv::trim(f[1]));
        if (!date)
            throw ValidationError(source_name + ":" + std::to_string(row.line) + ": bad date '" +
                                  std::string(csv::trim(f[1])) + "'");
        out.push_back({*author, *date, std::move(f[2])});
    }
    return out;
}

inline std::vector<CommentRecord> read_comments(const std::filesystem::path& path, const NodeRegistry& registry) {
    auto in = detail::open_input(path);
    return read_comments(in, path.string(), registry);
}

namespace detail {

/// Decodes one UTF-8 code point at `pos`; invalid bytes decode as U+FFFD
/// and consume one byte.
inline char32_t decode_utf8(std::string_view s, std::size_t& pos) {
    const auto b0 = static_cast<unsigned char>(s[pos]);
    auto cont = [&](std::size_t k) {
        return pos + k < s.size() && (static_cast<unsigned char>(s[pos + k]) & 0xC0) == 0x80;
    };
    auto bits = [&](std::size_t k) { return static_cast<char32_t>(static_cast<unsigned char>(s[pos + k]) & 0x3F); };
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2 && cont(1)) {
        const char32_t c = (static_cast<char32_t>(b0 & 0x1F) << 6) | bits(1);
        pos += 2;
        return c;
    }
    if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
        const char32_t c = (static_cast<char32_t>(b0 & 0x0F) << 12) | (bits(1) << 6) | bits(2);
        pos += 3;
        return c;
    }
    if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
        const char32_t c =
            (static_cast<char32_t>(b0 & 0x07) << 18) | (bits(1) << 12) | (bits(2) << 6) | bits(3);
        pos += 4;
        return c;
    }
    ++pos;
    return 0xFFFD;
}

inline void append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

/// ASCII letters and digits, Latin-1 letters, and any code point above
/// Latin-1 outside the punctuation, symbol and space blocks.
inline bool is_word_char(char32_t c) {
    if (c < 0x80) return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    if (c < 0xC0) return c == 0xAA || c == 0xB5 || c == 0xBA;
    if (c <= 0xFF) return c != 0xD7 && c != 0xF7;
    if (c >= 0x2000 && c <= 0x2BFF) return false;  // punctuation, symbols, arrows, shapes
    if (c >= 0x3000 && c <= 0x303F) return false;  // CJK punctuation
    if (c >= 0xFE30 && c <= 0xFE6F) return false;
    if (c >= 0xFF00 && c <= 0xFF0F) return false;
    if (c >= 0x1F000 && c <= 0x1FAFF) return false;  // emoji and pictographs
    if (c == 0xFFFD || c == 0xFEFF) return false;
    return true;
}

inline char32_t fold_case(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 32;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 32;
    if (c >= 0x100 && c <= 0x17F && (c % 2 == 0) && c != 0x130 && c != 0x138) return c + 1;  // Latin Extended-A pairs
    return c;
}

}  // namespace detail

struct Token {
    std::string surface;  ///< as written
    std::string folded;   ///< case-folded counting key
};

/// Lower-cases ASCII, Latin-1 and the Latin Extended-A letter pairs.
inline std::string fold(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t pos = 0; pos < text.size();) detail::append_utf8(out, detail::fold_case(detail::decode_utf8(text, pos)));
    return out;
}

/// Maximal runs of word characters. Tokens shorter than two code points
/// and tokens whose folded form is a stopword are dropped.
inline std::vector<Token> tokenize(std::string_view text, const std::unordered_set<std::string>& stopwords) {
    std::vector<Token> out;
    Token cur;
    std::size_t length = 0;
    auto flush = [&] {
        if (length >= 2 && !stopwords.count(cur.folded)) out.push_back(std::move(cur));
        cur = Token{};
        length = 0;
    };
    for (std::size_t pos = 0; pos < text.size();) {
        const std::size_t begin = pos;
        const char32_t c = detail::decode_utf8(text, pos);
        if (detail::is_word_char(c)) {
            cur.surface.append(text.substr(begin, pos - begin));
            detail::append_utf8(cur.folded, detail::fold_case(c));
            ++length;
        } else if (length > 0 || !cur.surface.empty()) {
            flush();
        }
    }
    flush();
    return out;
}

/// A German stopword list (function words, auxiliaries, pronouns).
inline const std::unordered_set<std::string>& german_stopwords() {
    static const std::unordered_set<std::string> words = {
        "aber", "alle", "allem", "allen", "aller", "alles", "als", "also", "am", "an", "ander", "andere", "anderem",
        "anderen", "anderer", "anderes", "anders", "auch", "auf", "aus", "bei", "bin", "bis", "bist", "da", "damit",
        "dann", "das", "dass", "daß", "dasselbe", "dazu", "dein", "deine", "deinem", "deinen", "deiner", "dem",
        "demselben", "den", "denn", "denselben", "der", "derer", "derselbe", "derselben", "des", "desselben",
        "dessen", "dich", "die", "dies", "diese", "dieselbe", "dieselben", "diesem", "diesen", "dieser", "dieses",
        "dir", "doch", "dort", "du", "durch", "ein", "eine", "einem", "einen", "einer", "eines", "einig", "einige",
        "einigem", "einigen", "einiger", "einiges", "einmal", "er", "es", "etwas", "euch", "euer", "eure", "eurem",
        "euren", "eurer", "eures", "für", "gegen", "gewesen", "hab", "habe", "haben", "hat", "hatte", "hatten",
        "hier", "hin", "hinter", "ich", "ihm", "ihn", "ihnen", "ihr", "ihre", "ihrem", "ihren", "ihrer", "ihres",
        "im", "in", "indem", "ins", "ist", "ja", "jede", "jedem", "jeden", "jeder", "jedes", "jene", "jenem",
        "jenen", "jener", "jenes", "jetzt", "kann", "kein", "keine", "keinem", "keinen", "keiner", "keines",
        "können", "könnte", "machen", "man", "manche", "manchem", "manchen", "mancher", "manches", "mein", "meine",
        "meinem", "meinen", "meiner", "meines", "mich", "mir", "mit", "muss", "musste", "nach", "nicht", "nichts",
        "noch", "nun", "nur", "ob", "oder", "ohne", "schon", "sehr", "sein", "seine", "seinem", "seinen", "seiner",
        "seines", "selbst", "sich", "sie", "sind", "so", "solche", "solchem", "solchen", "solcher", "solches",
        "soll", "sollte", "sondern", "sonst", "über", "um", "und", "uns", "unser", "unsere", "unserem", "unseren",
        "unserer", "unseres", "unter", "viel", "vom", "von", "vor", "während", "war", "waren", "warst", "was",
        "weg", "weil", "weiter", "welche", "welchem", "welchen", "welcher", "welches", "wenn", "werde", "werden",
        "wie", "wieder", "will", "wir", "wird", "wirst", "wo", "wollen", "wollte", "würde", "würden", "zu", "zum",
        "zur", "zwar", "zwischen",
    };
    return words;
}

/// One word per line; `#` starts a comment. Words are case-folded.
inline std::unordered_set<std::string> read_stopwords(const std::filesystem::path& path) {
    auto in = detail::open_input(path);
    std::unordered_set<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto word = csv::trim(line);
        if (!word.empty()) out.insert(fold(word));
    }
    return out;
}

/// log2((k / G) / (K / T)) for k occurrences among G group tokens and K
/// among T corpus tokens.
inline double pmi(std::uint64_t count_in_group, std::uint64_t group_total, std::uint64_t count_global,
                  std::uint64_t global_total) {
    if (group_total == 0 || count_global == 0 || global_total == 0)
        throw ValidationError("pmi needs positive totals");
    if (count_in_group == 0) throw UndefinedMetricError("pmi of a word absent from the group");
    const double in_rate = static_cast<double>(count_in_group) / static_cast<double>(group_total);
    const double rate = static_cast<double>(count_global) / static_cast<double>(global_total);
    return std::log2(in_rate / rate);
}

enum class SignificanceTest { GTest, PearsonChi2 };

struct Significance {
    double statistic = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  ///< a zero margin; p is reported as 1
};

/// Survival function of the chi-square distribution with one degree of
/// freedom.
inline double chi2_1_sf(double x) { return x <= 0.0 ? 1.0 : std::erfc(std::sqrt(0.5 * x)); }

/// 2x2 test of the group rate k/G against the complement rate
/// (K-k)/(T-G), chi-square reference with one degree of freedom.
inline Significance significance(std::uint64_t count_in_group, std::uint64_t group_total, std::uint64_t count_global,
                                 std::uint64_t global_total, SignificanceTest test = SignificanceTest::GTest) {
    if (count_in_group > group_total || count_global > global_total || group_total > global_total ||
        count_in_group > count_global)
        throw ValidationError("inconsistent counts for significance test");
    const double o[2][2] = {
        {static_cast<double>(count_in_group), static_cast<double>(group_total - count_in_group)},
        {static_cast<double>(count_global - count_in_group),
         static_cast<double>((global_total - group_total) - (count_global - count_in_group))},
    };
    const double row[2] = {o[0][0] + o[0][1], o[1][0] + o[1][1]};
    const double col[2] = {o[0][0] + o[1][0], o[0][1] + o[1][1]};
    const double n = row[0] + row[1];
    Significance s;
    if (row[0] == 0.0 || row[1] == 0.0 || col[0] == 0.0 || col[1] == 0.0) {
        s.degenerate = true;
        return s;
    }
    double stat = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            const double e = row[i] * col[j] / n;
            if (test == SignificanceTest::GTest) {
                if (o[i][j] > 0.0) stat += o[i][j] * std::log(o[i][j] / e);
            } else {
                stat += (o[i][j] - e) * (o[i][j] - e) / e;
            }
        }
    if (test == SignificanceTest::GTest) stat *= 2.0;
    s.statistic = std::max(stat, 0.0);
    s.p_value = chi2_1_sf(s.statistic);
    return s;
}

struct WordGroupStat {
    std::string word;  ///< most frequent surface form
    std::string group;
    std::uint64_t count_in_group = 0;
    std::uint64_t count_total = 0;
    double pmi = 0.0;
    double p_value = 1.0;
    bool degenerate = false;
};

/// Token counts per group and word over a tokenized corpus.
class CorpusCounts {
public:
    CorpusCounts(const std::vector<CommentRecord>& comments, const Partition& partition,
                 const std::unordered_set<std::string>& stopwords)
        : partition_(partition),
          group_tokens_(partition.label_count(), 0),
          group_comments_(partition.label_count(), 0),
          group_users_(partition.label_count()) {
        for (const auto& c : comments) {
            if (c.author >= partition.size()) throw ValidationError("comment author outside the partition");
            const GroupIndex g = partition.group_of(c.author);
            ++group_comments_[g];
            group_users_[g].insert(c.author);
            for (auto& tok : tokenize(c.text, stopwords)) {
                auto& entry = words_[tok.folded];
                if (entry.per_group.empty()) entry.per_group.assign(partition.label_count(), 0);
                ++entry.per_group[g];
                ++entry.total;
                ++entry.surfaces[tok.surface];
                ++group_tokens_[g];
                ++total_tokens_;
            }
        }
    }

    std::uint64_t total_tokens() const { return total_tokens_; }
    std::uint64_t group_tokens(GroupIndex g) const { return group_tokens_.at(g); }
    std::size_t group_comments(GroupIndex g) const { return group_comments_.at(g); }
    std::size_t group_users(GroupIndex g) const { return group_users_.at(g).size(); }
    std::size_t vocabulary_size() const { return words_.size(); }

    std::uint64_t count(std::string_view folded, GroupIndex g) const {
        const auto it = words_.find(std::string(folded));
        return it == words_.end() ? 0 : it->second.per_group[g];
    }
    std::uint64_t count(std::string_view folded) const {
        const auto it = words_.find(std::string(folded));
        return it == words_.end() ? 0 : it->second.total;
    }

    /// Statistics of every word present in group g, in folded-word order.
    std::vector<WordGroupStat> stats(GroupIndex g, SignificanceTest test = SignificanceTest::GTest) const {
        std::vector<WordGroupStat> out;
        for (const auto& [folded, entry] : words_) {
            const auto k = entry.per_group[g];
            if (k == 0) continue;
            WordGroupStat s;
            s.word = surface(entry, folded);
            s.group = partition_.label(g);
            s.count_in_group = k;
            s.count_total = entry.total;
            s.pmi = pmi(k, group_tokens_[g], entry.total, total_tokens_);
            const auto sig = significance(k, group_tokens_[g], entry.total, total_tokens_, test);
            s.p_value = sig.p_value;
            s.degenerate = sig.degenerate;
            out.push_back(std::move(s));
        }
        return out;
    }

private:
    struct Entry {
        std::vector<std::uint64_t> per_group;
        std::uint64_t total = 0;
        std::map<std::string, std::uint64_t> surfaces;
    };

    static std::string surface(const Entry& e, const std::string& folded) {
        const std::string* best = &folded;
        std::uint64_t best_count = 0;
        for (const auto& [form, n] : e.surfaces)
            if (n > best_count) {
                best = &form;
                best_count = n;
            }
        return *best;
    }

    const Partition& partition_;
    std::map<std::string, Entry> words_;
    std::uint64_t total_tokens_ = 0;
    std::vector<std::uint64_t> group_tokens_;
    std::vector<std::size_t> group_comments_;
    std::vector<std::set<NodeIndex>> group_users_;
};

struct GroupTopics {
    std::string group;
    std::vector<WordGroupStat> words;  ///< ranked by PMI, descending
    std::uint64_t word_count = 0;
    std::size_t comment_count = 0;
    std::size_t user_count = 0;
};

struct TopicReport {
    std::vector<GroupTopics> groups;
    std::vector<std::string> notes;
};

struct TopicOptions {
    std::size_t top_k = 10;
    double alpha = 0.01;
    SignificanceTest test = SignificanceTest::GTest;
};

/// Words with p < alpha and positive PMI, ranked by PMI (ties by word),
/// truncated to top_k per group. Groups without comments are omitted and
/// noted.
inline TopicReport topic_report(const std::vector<CommentRecord>& comments, const Partition& partition,
                                const std::unordered_set<std::string>& stopwords, const TopicOptions& opt = {}) {
    if (comments.empty()) throw ValidationError("topic report needs at least one comment");
    if (!(opt.alpha > 0.0 && opt.alpha <= 1.0)) throw ValidationError("alpha must lie in (0, 1]");
    const CorpusCounts counts(comments, partition, stopwords);
    TopicReport report;
    for (GroupIndex g = 0; g < partition.label_count(); ++g) {
        if (counts.group_comments(g) == 0) {
            report.notes.push_back("group '" + partition.label(g) + "' has no comments");
            continue;
        }
        GroupTopics t;
        t.group = partition.label(g);
        t.word_count = counts.group_tokens(g);
        t.comment_count = counts.group_comments(g);
        t.user_count = counts.group_users(g);
        if (t.word_count > 0) {
            for (auto& s : counts.stats(g, opt.test))
                if (!s.degenerate && s.p_value < opt.alpha && s.pmi > 0.0) t.words.push_back(std::move(s));
            std::stable_sort(t.words.begin(), t.words.end(), [](const WordGroupStat& a, const WordGroupStat& b) {
                if (a.pmi != b.pmi) return a.pmi > b.pmi;
                return a.word < b.word;
            });
            if (t.words.size() > opt.top_k) t.words.resize(opt.top_k);
        }
        report.groups.push_back(std::move(t));
    }
    return report;
}

}  // namespace polarnet
