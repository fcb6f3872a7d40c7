#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sprig/corpus.hpp"

namespace sprig {

enum class NormalizationMode { simple, lower, none };

NormalizationMode parse_normalization_mode(std::string_view name);
std::string_view to_string(NormalizationMode mode);

/// One capitalized span found by the regex heuristic, before aggregation.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last byte
    std::string_view text;
};

/// Maximal, non-overlapping, left-to-right matches of
///   \b[A-Z][a-z]+(\s+[A-Z][a-z]+){0,3}\b
/// Bytes >= 0x80 count as word characters for the boundary tests.
std::vector<Span> find_capitalized_spans(std::string_view text);

/// simple: lowercase and delete every byte that is not a letter, digit or
/// space, then collapse spaces. lower: ASCII lowercase. none: identity.
std::string normalize_entity(std::string_view surface, NormalizationMode mode);

struct EntityMention {
    std::string surface;     // first surface form seen in the passage
    std::string normalized;  // aggregation key
    DocId passage = 0;
    std::uint32_t count = 0;  // tf within the passage
};

struct ExtractOptions {
    NormalizationMode mode = NormalizationMode::simple;
    std::size_t min_entity_len = 2;  // applies to the normalized form
};

/// Regex-heuristic mentions of one passage, aggregated per normalized form
/// in order of first appearance.
std::vector<EntityMention> extract_regex(std::string_view text, DocId passage, const ExtractOptions& options = {});

/// Zero-KB title alias map: normalized title and its parenthesis-stripped
/// base both point at the normalized title, only where exactly one distinct
/// title produces the alias.
class AliasMap {
public:
    AliasMap() = default;
    explicit AliasMap(std::unordered_map<std::string, std::string> entries) : entries_(std::move(entries)) {}

    std::string resolve(const std::string& mention) const {
        auto it = entries_.find(mention);
        return it == entries_.end() ? mention : it->second;
    }

    std::size_t size() const noexcept { return entries_.size(); }
    bool empty() const noexcept { return entries_.empty(); }
    const std::unordered_map<std::string, std::string>& entries() const noexcept { return entries_; }

private:
    std::unordered_map<std::string, std::string> entries_;
};

/// "X (film)" -> "X". Only a trailing parenthetical is removed.
std::string strip_parenthetical(std::string_view title);

AliasMap build_alias_map(std::span<const std::string> titles, NormalizationMode mode);
AliasMap build_alias_map(const Corpus& corpus, NormalizationMode mode);

inline std::string resolve(const std::string& mention, const AliasMap& map) { return map.resolve(mention); }

/// Per-passage mentions for the whole corpus, alias-resolved when a map is
/// given. Mentions that collapse onto the same canonical form are merged.
using CorpusMentions = std::vector<std::vector<EntityMention>>;

CorpusMentions extract_corpus(const Corpus& corpus, const ExtractOptions& options, const AliasMap* aliases = nullptr);

/// Replays externally produced entities (one {"id", "entities"} object per
/// line) instead of the regex heuristic. Passages absent from the file get
/// no mentions; ids not in the corpus are an error.
CorpusMentions load_external_entities(const std::string& path, const Corpus& corpus, const ExtractOptions& options,
                                      const AliasMap* aliases = nullptr);

/// Merges mentions with equal normalized form after alias resolution.
void apply_aliases(std::vector<EntityMention>& mentions, const AliasMap& aliases);

}  // namespace sprig
