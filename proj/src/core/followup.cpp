#include "storybuddy/followup.hpp"

#include "storybuddy/error.hpp"

#include <algorithm>
#include <set>

namespace storybuddy {

const FollowUpLink* AnchorSet::link_for(std::string_view anchor_id) const {
    const auto it = std::find_if(links.begin(), links.end(),
                                 [&](const FollowUpLink& l) { return l.anchor_id == anchor_id; });
    return it == links.end() ? nullptr : &*it;
}

bool AnchorSet::is_followup(std::string_view qa_id) const {
    return std::any_of(links.begin(), links.end(), [&](const FollowUpLink& l) { return l.followup_id == qa_id; });
}

int similarity(const QAPair& a, const QAPair& b, const WordList& stopwords) {
    const auto ta = content_tokens(a.question_text, stopwords);
    const auto tb = content_tokens(b.question_text, stopwords);
    int shared = 0;
    for (const auto& t : ta) shared += static_cast<int>(tb.count(t));
    return shared;
}

AnchorSet link_followups(int page_index, std::span<const QAPair> ranked, const WordList& stopwords) {
    AnchorSet out;
    out.page_index = page_index;
    const std::size_t anchor_count = std::min(kAnchorCount, ranked.size());
    for (std::size_t i = 0; i < anchor_count; ++i) out.anchors.push_back(ranked[i].id);

    std::set<std::size_t> taken;
    for (std::size_t a = 0; a < anchor_count; ++a) {
        const QAPair& anchor = ranked[a];
        const std::string anchor_text = normalize_spacing(anchor.question_text);
        std::optional<std::size_t> best;
        int best_sim = 0;
        for (std::size_t c = anchor_count; c < ranked.size(); ++c) {
            if (taken.count(c) != 0) continue;
            const QAPair& cand = ranked[c];
            if (cand.id == anchor.id) continue;
            const int sim = similarity(anchor, cand, stopwords);
            if (sim < kMinFollowUpSimilarity) continue;
            const std::string answer = normalize_spacing(cand.answer_text);
            if (anchor_text.find(answer) != std::string::npos) continue;
            const bool better = !best || sim > best_sim ||
                                (sim == best_sim && (cand.rank_score > ranked[*best].rank_score ||
                                                     (cand.rank_score == ranked[*best].rank_score &&
                                                      cand.id < ranked[*best].id)));
            if (better) {
                best = c;
                best_sim = sim;
            }
        }
        if (best) {
            taken.insert(*best);
            out.links.push_back({anchor.id, ranked[*best].id, best_sim});
        }
    }
    return out;
}

nlohmann::json anchor_set_to_json(const AnchorSet& set) {
    nlohmann::json links = nlohmann::json::array();
    for (const auto& l : set.links) {
        links.push_back({{"anchor_id", l.anchor_id}, {"followup_id", l.followup_id}, {"similarity", l.similarity}});
    }
    return {{"page_index", set.page_index}, {"anchors", set.anchors}, {"links", links}};
}

AnchorSet anchor_set_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("page_index") || !doc.contains("anchors")) throw SchemaError("anchors");
    AnchorSet set;
    set.page_index = doc.at("page_index").get<int>();
    set.anchors = doc.at("anchors").get<std::vector<std::string>>();
    if (doc.contains("links")) {
        for (const auto& l : doc.at("links")) {
            set.links.push_back({l.at("anchor_id").get<std::string>(), l.at("followup_id").get<std::string>(),
                                 l.at("similarity").get<int>()});
        }
    }
    return set;
}

}  // namespace storybuddy
