#pragma once

#include "storybuddy/lexicons.hpp"
#include "storybuddy/qag.hpp"

#include <nlohmann/json.hpp>

#include <span>
#include <string>
#include <vector>

namespace storybuddy {

struct FollowUpLink {
    std::string anchor_id;
    std::string followup_id;
    int similarity = 0;

    friend bool operator==(const FollowUpLink&, const FollowUpLink&) = default;
};

/// The anchors of one page (its top-ranked questions) and the follow-up
/// attached to each, if any.
struct AnchorSet {
    int page_index = 0;
    std::vector<std::string> anchors;
    std::vector<FollowUpLink> links;

    const FollowUpLink* link_for(std::string_view anchor_id) const;
    bool is_followup(std::string_view qa_id) const;

    friend bool operator==(const AnchorSet&, const AnchorSet&) = default;
};

inline constexpr std::size_t kAnchorCount = 3;
inline constexpr int kMinFollowUpSimilarity = 4;  // overlap must be greater than 3

/// Distinct content tokens shared by the two question texts.
int similarity(const QAPair& a, const QAPair& b, const WordList& stopwords);

/// Anchors the first min(3, n) pairs, then walks the anchors in rank order and
/// gives each the most similar unassigned non-anchor whose overlap exceeds 3
/// and whose answer does not appear in the anchor's question. Ties go to the
/// higher rank score, then the smaller id.
AnchorSet link_followups(int page_index, std::span<const QAPair> ranked, const WordList& stopwords);

nlohmann::json anchor_set_to_json(const AnchorSet& set);
AnchorSet anchor_set_from_json(const nlohmann::json& doc);

}  // namespace storybuddy
