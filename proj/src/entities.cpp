#include "sprig/entities.hpp"

#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "sprig/error.hpp"
#include "sprig/text.hpp"

namespace sprig {

namespace {

bool is_word(unsigned char c) noexcept {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c >= 0x80;
}
bool is_upper(unsigned char c) noexcept { return c >= 'A' && c <= 'Z'; }
bool is_lower(unsigned char c) noexcept { return c >= 'a' && c <= 'z'; }

// End of a [A-Z][a-z]+ word starting at `pos` that is followed by a word
// boundary, or npos.
std::size_t capitalized_word_end(std::string_view text, std::size_t pos) {
    const auto at = [&](std::size_t i) { return static_cast<unsigned char>(text[i]); };
    if (pos >= text.size() || !is_upper(at(pos))) return std::string_view::npos;
    std::size_t j = pos + 1;
    while (j < text.size() && is_lower(at(j))) ++j;
    if (j == pos + 1) return std::string_view::npos;
    if (j < text.size() && is_word(at(j))) return std::string_view::npos;
    return j;
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == ' ') {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(c);
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

void add_mention(std::vector<EntityMention>& mentions, std::map<std::string, std::size_t, std::less<>>& slot,
                 std::string surface, std::string normalized, DocId passage, std::uint32_t count) {
    auto it = slot.find(normalized);
    if (it != slot.end()) {
        mentions[it->second].count += count;
        return;
    }
    slot.emplace(normalized, mentions.size());
    mentions.push_back(EntityMention{std::move(surface), std::move(normalized), passage, count});
}

}  // namespace

NormalizationMode parse_normalization_mode(std::string_view name) {
    if (name == "simple") return NormalizationMode::simple;
    if (name == "lower") return NormalizationMode::lower;
    if (name == "none") return NormalizationMode::none;
    throw Error("entity_extraction", "unknown normalization mode '" + std::string(name) + "'");
}

std::string_view to_string(NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::simple: return "simple";
        case NormalizationMode::lower: return "lower";
        case NormalizationMode::none: return "none";
    }
    return "unknown";
}

std::vector<Span> find_capitalized_spans(std::string_view text) {
    std::vector<Span> spans;
    std::size_t i = 0;
    while (i < text.size()) {
        const bool left_boundary = i == 0 || !is_word(static_cast<unsigned char>(text[i - 1]));
        std::size_t end = left_boundary ? capitalized_word_end(text, i) : std::string_view::npos;
        if (end == std::string_view::npos) {
            ++i;
            continue;
        }
        for (int extra = 0; extra < 3; ++extra) {
            std::size_t k = end;
            while (k < text.size() && is_ascii_space(text[k])) ++k;
            if (k == end) break;
            const std::size_t next = capitalized_word_end(text, k);
            if (next == std::string_view::npos) break;
            end = next;
        }
        spans.push_back(Span{i, end, text.substr(i, end - i)});
        i = end;
    }
    return spans;
}

std::string normalize_entity(std::string_view surface, NormalizationMode mode) {
    switch (mode) {
        case NormalizationMode::none: return std::string(surface);
        case NormalizationMode::lower: {
            std::string out(surface);
            for (char& c : out)
                if (is_upper(static_cast<unsigned char>(c))) c = static_cast<char>(c - 'A' + 'a');
            return out;
        }
        case NormalizationMode::simple: {
            std::string kept;
            kept.reserve(surface.size());
            for (char ch : surface) {
                const auto c = static_cast<unsigned char>(ch);
                if (is_upper(c)) {
                    kept.push_back(static_cast<char>(c - 'A' + 'a'));
                } else if (is_lower(c) || (c >= '0' && c <= '9') || c >= 0x80) {
                    kept.push_back(ch);
                } else if (is_ascii_space(ch)) {
                    kept.push_back(' ');
                }
            }
            return collapse_spaces(kept);
        }
    }
    return std::string(surface);
}

std::vector<EntityMention> extract_regex(std::string_view text, DocId passage, const ExtractOptions& options) {
    std::vector<EntityMention> mentions;
    std::map<std::string, std::size_t, std::less<>> slot;
    for (const Span& span : find_capitalized_spans(text)) {
        std::string normalized = normalize_entity(span.text, options.mode);
        if (normalized.empty() || normalized.size() < options.min_entity_len) continue;
        add_mention(mentions, slot, std::string(span.text), std::move(normalized), passage, 1);
    }
    return mentions;
}

std::string strip_parenthetical(std::string_view title) {
    const std::string trimmed = normalize_text(title);
    if (trimmed.empty() || trimmed.back() != ')') return trimmed;
    const std::size_t open = trimmed.rfind('(');
    if (open == std::string::npos) return trimmed;
    std::string base = normalize_text(std::string_view(trimmed).substr(0, open));
    return base.empty() ? trimmed : base;
}

AliasMap build_alias_map(std::span<const std::string> titles, NormalizationMode mode) {
    const std::set<std::string> distinct(titles.begin(), titles.end());
    // alias -> canonical of its producer; aliases reached from two distinct
    // titles are dropped afterwards.
    std::unordered_map<std::string, std::string> producer;
    std::set<std::string> ambiguous;
    for (const std::string& title : distinct) {
        const std::string canonical = normalize_entity(title, mode);
        if (canonical.empty()) continue;
        std::set<std::string> aliases{canonical};
        if (std::string base = normalize_entity(strip_parenthetical(title), mode); !base.empty())
            aliases.insert(std::move(base));
        for (const std::string& alias : aliases) {
            auto [it, inserted] = producer.emplace(alias, canonical);
            if (!inserted) ambiguous.insert(alias);
        }
    }
    for (const std::string& alias : ambiguous) producer.erase(alias);
    return AliasMap(std::move(producer));
}

AliasMap build_alias_map(const Corpus& corpus, NormalizationMode mode) {
    std::vector<std::string> titles;
    titles.reserve(corpus.size());
    for (const Passage& p : corpus.passages())
        if (!p.title.empty()) titles.push_back(p.title);
    return build_alias_map(titles, mode);
}

void apply_aliases(std::vector<EntityMention>& mentions, const AliasMap& aliases) {
    if (aliases.empty()) return;
    std::vector<EntityMention> merged;
    std::map<std::string, std::size_t, std::less<>> slot;
    for (EntityMention& m : mentions) {
        std::string canonical = aliases.resolve(m.normalized);
        add_mention(merged, slot, std::move(m.surface), std::move(canonical), m.passage, m.count);
    }
    mentions = std::move(merged);
}

CorpusMentions extract_corpus(const Corpus& corpus, const ExtractOptions& options, const AliasMap* aliases) {
    CorpusMentions out(corpus.size());
    for (DocId d = 0; d < corpus.size(); ++d) {
        out[d] = extract_regex(corpus[d].content(), d, options);
        if (aliases) apply_aliases(out[d], *aliases);
    }
    return out;
}

CorpusMentions load_external_entities(const std::string& path, const Corpus& corpus, const ExtractOptions& options,
                                      const AliasMap* aliases) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("entity_extraction", "cannot open entities file '" + path + "'");
    CorpusMentions out(corpus.size());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (normalize_text(line).empty()) continue;
        const std::string where = path + " line " + std::to_string(line_no);
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw Error("entity_extraction", where + ": malformed JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string() || !obj.contains("entities") ||
            !obj["entities"].is_array())
            throw Error("entity_extraction", where + ": expected {\"id\": str, \"entities\": [str]}");
        const auto doc = corpus.find(obj["id"].get<std::string>());
        if (!doc) throw Error("entity_extraction", where + ": unknown passage id '" + obj["id"].get<std::string>() + "'");
        std::vector<EntityMention>& mentions = out[*doc];
        std::map<std::string, std::size_t, std::less<>> slot;
        for (std::size_t i = 0; i < mentions.size(); ++i) slot.emplace(mentions[i].normalized, i);
        for (const auto& e : obj["entities"]) {
            if (!e.is_string()) throw Error("entity_extraction", where + ": entity surfaces must be strings");
            std::string surface = normalize_text(e.get<std::string>());
            std::string normalized = normalize_entity(surface, options.mode);
            if (normalized.empty() || normalized.size() < options.min_entity_len) continue;
            add_mention(mentions, slot, std::move(surface), std::move(normalized), *doc, 1);
        }
    }
    if (aliases)
        for (auto& mentions : out) apply_aliases(mentions, *aliases);
    return out;
}

}  // namespace sprig
