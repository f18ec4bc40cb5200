#include "snb/datagen.hpp"

#include "snb/dictionaries.hpp"
#include "snb/errors.hpp"
#include "snb/random.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace snb {

void GenConfig::validate() const {
    auto fail = [](const std::string& field, const std::string& why) {
        throw ConfigInvalid("GenConfig." + field + ": " + why);
    };
    if (num_persons < 0) fail("num_persons", "must be >= 0");
    if (!(simulation_start < simulation_end)) fail("simulation_start", "must precede simulation_end");
    if (!(cutoff_fraction > 0.0 && cutoff_fraction <= 1.0)) fail("cutoff_fraction", "must be in (0, 1]");
    if (t_safe.millis < 0) fail("t_safe", "must be >= 0");
    if (!(degree_exponent > 1.0)) fail("degree_exponent", "must be > 1");
    if (!(homophily_weight >= 0.0 && homophily_weight <= 1.0)) fail("homophily_weight", "must be in [0, 1]");
    if (flashmob_count < 0) fail("flashmob_count", "must be >= 0");
    if (!(person_deletion_rate >= 0.0 && person_deletion_rate <= 1.0))
        fail("person_deletion_rate", "must be in [0, 1]");
    if (!(content_deletion_rate >= 0.0 && content_deletion_rate <= 1.0))
        fail("content_deletion_rate", "must be in [0, 1]");
    if (!(posts_per_membership >= 0.0)) fail("posts_per_membership", "must be >= 0");
}

namespace {

constexpr double kMillisPerDay = 86'400'000.0;
constexpr double kMeanPersonLifetimeDays = 365.0;

std::optional<SimInstant> earliest(std::optional<SimInstant> a, std::optional<SimInstant> b) {
    if (!a) return b;
    if (!b) return a;
    return std::min(*a, *b);
}

class Generator {
public:
    explicit Generator(const GenConfig& cfg) : cfg_(cfg), rng_(cfg.seed) {}

    TemporalGraph run() {
        if (cfg_.num_persons == 0) return {};
        make_persons();
        make_knows();
        make_forums();
        make_memberships();
        make_posts();
        make_flashmobs();
        make_comments();
        make_likes();
        return std::move(g_);
    }

private:
    struct Window {
        SimInstant lo;
        SimInstant hi; // exclusive
        bool empty() const { return !(lo < hi); }
    };

    /// Children are created at least t_safe after every parent and at least t_safe before any
    /// parent is deleted, so every insert and every cascade root sees its dependencies t_safe earlier.
    Window child_window(std::initializer_list<const Lifecycle*> parents) const {
        SimInstant lo = cfg_.simulation_start;
        SimInstant hi = cfg_.simulation_end;
        for (const Lifecycle* p : parents) {
            lo = std::max(lo, p->creation + cfg_.t_safe);
            if (p->deletion) hi = std::min(hi, *p->deletion - cfg_.t_safe);
        }
        return {lo, hi};
    }

    static std::optional<SimInstant> cascade_bound(std::initializer_list<const Lifecycle*> parents) {
        std::optional<SimInstant> bound;
        for (const Lifecycle* p : parents) bound = earliest(bound, p->deletion);
        return bound;
    }

    SimInstant uniform_in(Window w) {
        return {rng_.uniform_int(w.lo.millis, w.hi.millis - 1)};
    }

    /// Biased towards the start of the window: most activity follows soon after it becomes possible.
    SimInstant soon_after(Window w, double mean_millis) {
        const auto delay = static_cast<std::int64_t>(rng_.exponential(mean_millis));
        const SimInstant t = w.lo + SimDuration{delay};
        return t < w.hi ? t : uniform_in(w);
    }

    /// Final deletion: the earlier of an optional independent deletion and the cascade bound.
    /// Records a DeletionRoot when the independent deletion wins.
    std::optional<SimInstant> decide_deletion(SimInstant creation, std::optional<SimInstant> bound,
                                              OpType root_type, EntityId first, EntityId second) {
        if (rng_.bernoulli(cfg_.content_deletion_rate)) {
            const Window w{creation + cfg_.t_safe, bound ? *bound : cfg_.simulation_end};
            if (!w.empty()) {
                const SimInstant at = uniform_in(w);
                if (!bound || at < *bound) {
                    g_.deletion_roots.push_back({root_type, first, second, at});
                    return at;
                }
            }
        }
        return bound;
    }

    EntityId next_id() { return next_id_++; }

    // ---- persons -------------------------------------------------------------------------

    void make_persons() {
        const auto countries = dict::countries();
        const auto tags = dict::tags();
        const auto country_w = zipf_weights(countries.size(), 1.0);
        const DiscreteSampler country_sampler(country_w);
        const auto tag_w = zipf_weights(tags.size(), 0.9);
        const DiscreteSampler tag_sampler(tag_w);

        const Window join{cfg_.simulation_start + cfg_.t_safe, cfg_.simulation_end - cfg_.t_safe};
        if (join.empty()) throw ConfigInvalid("GenConfig.simulation_end: window shorter than t_safe");

        for (int i = 0; i < cfg_.num_persons; ++i) {
            Person p;
            p.id = next_id();
            const auto& country = countries[country_sampler.sample(rng_)];
            p.country_id = country.id;
            const auto fn_w = zipf_weights(country.first_names.size(), 0.8);
            const auto ln_w = zipf_weights(country.last_names.size(), 0.8);
            p.first_name = std::string(country.first_names[DiscreteSampler(fn_w).sample(rng_)]);
            p.last_name = std::string(country.last_names[DiscreteSampler(ln_w).sample(rng_)]);
            if (rng_.bernoulli(0.8)) {
                std::vector<EntityId> local;
                for (const auto& u : dict::universities())
                    if (u.country_id == country.id) local.push_back(u.id);
                if (!local.empty()) p.university_id = local[rng_.index(local.size())];
            }
            // Interests skew per country: rotate the popularity ranking by country.
            const int n_tags = 1 + std::min(rng_.geometric(2.0), 5);
            for (int t = 0; t < n_tags; ++t) {
                const std::size_t rank = tag_sampler.sample(rng_);
                const std::size_t idx = (rank + 3 * static_cast<std::size_t>(country.id)) % tags.size();
                p.tag_interests.push_back(tags[idx].id);
            }
            std::sort(p.tag_interests.begin(), p.tag_interests.end());
            p.tag_interests.erase(std::unique(p.tag_interests.begin(), p.tag_interests.end()),
                                  p.tag_interests.end());

            p.lifecycle.creation = uniform_in(join);
            if (rng_.bernoulli(cfg_.person_deletion_rate)) {
                // Exponential lifetime conditioned on ending inside the window.
                const SimInstant earliest_del = p.lifecycle.creation + cfg_.t_safe;
                const double span = static_cast<double>((cfg_.simulation_end - earliest_del).millis);
                if (span > 1) {
                    const double mean = kMeanPersonLifetimeDays * kMillisPerDay;
                    const double u = rng_.uniform() * -std::expm1(-span / mean);
                    const auto life = static_cast<std::int64_t>(-mean * std::log1p(-u));
                    const SimInstant at = earliest_del + SimDuration{std::min<std::int64_t>(life, static_cast<std::int64_t>(span) - 1)};
                    p.lifecycle.deletion = at;
                    g_.deletion_roots.push_back({OpType::Del1, p.id, 0, at});
                }
            }
            activity_.push_back(0.3 + rng_.exponential(1.0));
            g_.persons.push_back(std::move(p));
        }
        friends_.resize(g_.persons.size());
    }

    std::size_t person_index(EntityId id) const { return static_cast<std::size_t>(id - 1); }
    const Person& person(EntityId id) const { return g_.persons[person_index(id)]; }

    // ---- knows ---------------------------------------------------------------------------

    std::vector<int> target_degrees() {
        const int n = static_cast<int>(g_.persons.size());
        const int dmax = std::max(1, std::min(n - 1, static_cast<int>(std::lround(3.0 * std::sqrt(n)))));
        std::vector<double> w(static_cast<std::size_t>(dmax));
        for (int d = 1; d <= dmax; ++d) w[static_cast<std::size_t>(d - 1)] = std::pow(d, -cfg_.degree_exponent);
        const DiscreteSampler sampler(w);
        std::vector<int> degrees(static_cast<std::size_t>(n));
        for (auto& d : degrees) d = n > 1 ? static_cast<int>(sampler.sample(rng_)) + 1 : 0;
        return degrees;
    }

    /// Stub pool with lazy deletion: an entry is live while its owner still has free stubs.
    struct Pool {
        std::vector<std::size_t> entries;

        std::optional<std::size_t> draw(Rng& rng, const std::vector<int>& remaining) {
            while (!entries.empty()) {
                const std::size_t i = rng.index(entries.size());
                const std::size_t owner = entries[i];
                if (remaining[owner] > 0) return owner;
                entries[i] = entries.back();
                entries.pop_back();
            }
            return std::nullopt;
        }
    };

    void make_knows() {
        const std::size_t n = g_.persons.size();
        std::vector<int> remaining = target_degrees();
        Pool global;
        std::unordered_map<EntityId, Pool> by_country, by_university;
        for (std::size_t i = 0; i < n; ++i) {
            for (int s = 0; s < remaining[i]; ++s) {
                global.entries.push_back(i);
                by_country[g_.persons[i].country_id].entries.push_back(i);
                if (g_.persons[i].university_id) by_university[*g_.persons[i].university_id].entries.push_back(i);
            }
        }
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        rng_.shuffle(order);

        std::unordered_set<std::uint64_t> pairs;
        auto pair_key = [](std::size_t a, std::size_t b) {
            return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | std::max(a, b);
        };

        for (std::size_t p : order) {
            int attempts = 0;
            while (remaining[p] > 0) {
                Pool* pool = &global;
                if (rng_.bernoulli(cfg_.homophily_weight)) {
                    const auto& me = g_.persons[p];
                    pool = (me.university_id && rng_.bernoulli(0.4)) ? &by_university[*me.university_id]
                                                                     : &by_country[me.country_id];
                }
                const auto other = pool->draw(rng_, remaining);
                bool made = false;
                if (other && *other != p && !pairs.contains(pair_key(p, *other))) {
                    const auto& a = g_.persons[p].lifecycle;
                    const auto& b = g_.persons[*other].lifecycle;
                    const Window w = child_window({&a, &b});
                    if (!w.empty() && (w.hi - w.lo) > SimDuration::hours(1)) {
                        pairs.insert(pair_key(p, *other));
                        add_knows(p, *other, w);
                        --remaining[*other];
                        made = true;
                    }
                }
                if (made || ++attempts > 20) {
                    --remaining[p];
                    attempts = 0;
                }
            }
        }
    }

    void add_knows(std::size_t a, std::size_t b, Window w) {
        const Person& pa = g_.persons[a];
        const Person& pb = g_.persons[b];
        Lifecycle life;
        life.creation = soon_after(w, 60 * kMillisPerDay);
        KnowsEdge edge = snb::make_knows(pa.id, pb.id, life);
        edge.lifecycle.deletion = decide_deletion(life.creation, cascade_bound({&pa.lifecycle, &pb.lifecycle}),
                                                  OpType::Del8, edge.person1_id, edge.person2_id);
        friends_[a].push_back(pb.id);
        friends_[b].push_back(pa.id);
        knows_of_.emplace(edge_key(edge.person1_id, edge.person2_id), g_.knows.size());
        g_.knows.push_back(edge);
    }

    static std::uint64_t edge_key(EntityId a, EntityId b) {
        return (static_cast<std::uint64_t>(std::min(a, b)) << 32) | static_cast<std::uint64_t>(std::max(a, b));
    }

    // ---- forums & memberships -------------------------------------------------------------

    void add_forum(const Person& moderator, double mean_delay_millis) {
        const Window w = child_window({&moderator.lifecycle});
        if (w.empty()) return;
        Forum f;
        f.id = next_id();
        f.moderator_person_id = moderator.id;
        f.lifecycle.creation = soon_after(w, mean_delay_millis);
        const auto bound = cfg_.moderator_policy == ModeratorDeletionPolicy::DeleteForum
                               ? moderator.lifecycle.deletion
                               : std::nullopt;
        f.lifecycle.deletion = decide_deletion(f.lifecycle.creation, bound, OpType::Del4, f.id, 0);
        forum_index_.emplace(f.id, g_.forums.size());
        g_.forums.push_back(f);
    }

    void make_forums() {
        for (std::size_t i = 0; i < g_.persons.size(); ++i) {
            const Person& p = g_.persons[i];
            const std::size_t before = g_.forums.size();
            add_forum(p, 3'600'000.0);
            wall_.push_back(g_.forums.size() > before ? std::optional<std::size_t>(before) : std::nullopt);
            if (rng_.bernoulli(0.3)) add_forum(p, 90 * kMillisPerDay);
        }
        members_.resize(g_.forums.size());
    }

    void add_membership(std::size_t forum_idx, const Person& p, SimInstant not_before, double mean_delay) {
        const Forum& f = g_.forums[forum_idx];
        if (!member_pairs_.insert(edge_key(f.id, p.id)).second) return;
        Window w = child_window({&f.lifecycle, &p.lifecycle});
        w.lo = std::max(w.lo, not_before);
        if (w.empty()) {
            member_pairs_.erase(edge_key(f.id, p.id));
            return;
        }
        HasMemberEdge hm{f.id, p.id, {}};
        hm.lifecycle.creation = soon_after(w, mean_delay);
        hm.lifecycle.deletion = decide_deletion(hm.lifecycle.creation,
                                                cascade_bound({&f.lifecycle, &p.lifecycle}), OpType::Del5,
                                                f.id, p.id);
        members_[forum_idx].push_back(g_.memberships.size());
        g_.memberships.push_back(hm);
    }

    void make_memberships() {
        for (std::size_t fi = 0; fi < g_.forums.size(); ++fi)
            add_membership(fi, person(g_.forums[fi].moderator_person_id), SimInstant::min(), 600'000.0);
        for (const auto& k : g_.knows) {
            const SimInstant after = k.lifecycle.creation + cfg_.t_safe;
            for (auto [member, owner] : {std::pair{k.person1_id, k.person2_id}, std::pair{k.person2_id, k.person1_id}}) {
                const auto wall = wall_[person_index(owner)];
                if (wall && rng_.bernoulli(0.5)) add_membership(*wall, person(member), after, 2 * kMillisPerDay);
            }
        }
        for (std::size_t fi = 0; fi < g_.forums.size(); ++fi) {
            if (wall_[person_index(g_.forums[fi].moderator_person_id)] == fi) continue;
            const int extra = 3 + rng_.geometric(6.0);
            for (int j = 0; j < extra; ++j)
                add_membership(fi, g_.persons[rng_.index(g_.persons.size())], SimInstant::min(), 20 * kMillisPerDay);
        }
    }

    // ---- messages ------------------------------------------------------------------------

    EntityId message_country(const Person& author) {
        if (rng_.bernoulli(0.75)) return author.country_id;
        const auto countries = dict::countries();
        static const auto weights = zipf_weights(countries.size(), 0.7);
        static const DiscreteSampler sampler(weights);
        return countries[sampler.sample(rng_)].id;
    }

    void add_post(const Forum& f, const Person& author, SimInstant creation, std::vector<EntityId> tags) {
        Message m;
        m.id = next_id();
        m.kind = MessageKind::Post;
        m.creator_person_id = author.id;
        m.container_forum_id = f.id;
        m.country_id = message_country(author);
        m.tag_ids = std::move(tags);
        m.lifecycle.creation = creation;
        m.lifecycle.deletion = decide_deletion(creation, cascade_bound({&f.lifecycle, &author.lifecycle}),
                                               OpType::Del6, m.id, 0);
        m.root_post_id = m.id;
        g_.messages.push_back(std::move(m));
    }

    std::vector<EntityId> pick_tags(const Person& p) {
        std::vector<EntityId> tags;
        if (!p.tag_interests.empty()) tags.push_back(p.tag_interests[rng_.index(p.tag_interests.size())]);
        if (rng_.bernoulli(0.3)) {
            const auto all = dict::tags();
            tags.push_back(all[rng_.index(all.size())].id);
        }
        std::sort(tags.begin(), tags.end());
        tags.erase(std::unique(tags.begin(), tags.end()), tags.end());
        return tags;
    }

    void make_posts() {
        for (const auto& hm : g_.memberships) {
            const Forum& f = g_.forums[forum_index_.at(hm.forum_id)];
            const Person& p = person(hm.person_id);
            Window w = child_window({&f.lifecycle, &p.lifecycle});
            w.lo = std::max(w.lo, hm.lifecycle.creation);
            if (hm.lifecycle.deletion) w.hi = std::min(w.hi, *hm.lifecycle.deletion);
            if (w.empty()) continue;
            const double years = static_cast<double>((w.hi - w.lo).millis) / (365 * kMillisPerDay);
            const int n = rng_.geometric(cfg_.posts_per_membership * activity_[person_index(p.id)] * years);
            for (int i = 0; i < n; ++i) add_post(f, p, uniform_in(w), pick_tags(p));
        }
    }

    /// Bursts of Posts on one Tag inside a single hour.
    void make_flashmobs() {
        const auto tags = dict::tags();
        const SimDuration span = cfg_.simulation_end - cfg_.simulation_start;
        for (int e = 0; e < cfg_.flashmob_count; ++e) {
            const EntityId tag = tags[rng_.index(tags.size())].id;
            const Window when{cfg_.simulation_start + SimDuration{span.millis / 5},
                              cfg_.simulation_end - SimDuration::hours(2)};
            if (when.empty()) continue;
            const SimInstant t0 = uniform_in(when);
            const int wanted = std::max(30, cfg_.num_persons / 10);
            int made = 0;
            for (int tries = 0; tries < 20 * wanted && made < wanted; ++tries) {
                const Person& p = g_.persons[rng_.index(g_.persons.size())];
                const auto wall = wall_[person_index(p.id)];
                if (!wall) continue;
                const Forum& f = g_.forums[*wall];
                const SimInstant t = t0 + SimDuration{rng_.uniform_int(0, 3'600'000 - 1)};
                const Window w = child_window({&f.lifecycle, &p.lifecycle});
                if (t < w.lo || !(t < w.hi)) continue;
                add_post(f, p, t, {tag});
                ++made;
            }
        }
    }

    const Person* pick_interlocutor(const Person& about, std::size_t forum_idx) {
        const auto& fr = friends_[person_index(about.id)];
        if (!fr.empty() && rng_.bernoulli(0.7)) return &person(fr[rng_.index(fr.size())]);
        const auto& mem = members_[forum_idx];
        if (mem.empty()) return nullptr;
        return &person(g_.memberships[mem[rng_.index(mem.size())]].person_id);
    }

    void make_comments() {
        const std::size_t n_posts = g_.messages.size();
        for (std::size_t pi = 0; pi < n_posts; ++pi) {
            const std::size_t forum_idx = forum_index_.at(*g_.messages[pi].container_forum_id);
            std::vector<std::size_t> thread{pi};
            const int replies = rng_.geometric(1.3);
            for (int r = 0; r < replies; ++r) {
                const std::size_t parent_idx = thread[rng_.index(thread.size())];
                const Person* author = pick_interlocutor(person(g_.messages[parent_idx].creator_person_id), forum_idx);
                if (author == nullptr) continue;
                const Message& parent = g_.messages[parent_idx];
                const Window w = child_window({&parent.lifecycle, &author->lifecycle});
                if (w.empty()) continue;
                Message c;
                c.id = next_id();
                c.kind = MessageKind::Comment;
                c.creator_person_id = author->id;
                c.reply_to_message_id = parent.id;
                c.country_id = message_country(*author);
                c.tag_ids = parent.tag_ids;
                c.lifecycle.creation = soon_after(w, 0.25 * kMillisPerDay);
                c.lifecycle.deletion = decide_deletion(c.lifecycle.creation,
                                                       cascade_bound({&parent.lifecycle, &author->lifecycle}),
                                                       OpType::Del7, c.id, 0);
                c.root_post_id = parent.root_post_id;
                thread.push_back(g_.messages.size());
                g_.messages.push_back(std::move(c));
            }
        }
    }

    void make_likes() {
        std::unordered_set<std::uint64_t> liked;
        std::unordered_map<EntityId, std::size_t> message_index;
        for (std::size_t i = 0; i < g_.messages.size(); ++i) message_index.emplace(g_.messages[i].id, i);
        const std::size_t n_messages = g_.messages.size();
        for (std::size_t mi = 0; mi < n_messages; ++mi) {
            const Message& m = g_.messages[mi];
            const std::size_t forum_idx = forum_index_.at(
                *g_.messages[message_index.at(m.root_post_id)].container_forum_id);
            const int n = rng_.geometric(1.5);
            for (int i = 0; i < n; ++i) {
                const Person* liker = pick_interlocutor(person(m.creator_person_id), forum_idx);
                if (liker == nullptr || !liked.insert(edge_key(liker->id, m.id)).second) continue;
                const Window w = child_window({&m.lifecycle, &liker->lifecycle});
                if (w.empty()) continue;
                LikesEdge l{liker->id, m.id, {}};
                l.lifecycle.creation = soon_after(w, 1.0 * kMillisPerDay);
                l.lifecycle.deletion = decide_deletion(l.lifecycle.creation,
                                                       cascade_bound({&m.lifecycle, &liker->lifecycle}),
                                                       m.is_post() ? OpType::Del2 : OpType::Del3, liker->id, m.id);
                g_.likes.push_back(l);
            }
        }
    }

    const GenConfig& cfg_;
    Rng rng_;
    TemporalGraph g_;
    EntityId next_id_ = 1;
    std::vector<double> activity_;
    std::vector<std::vector<EntityId>> friends_;
    std::vector<std::optional<std::size_t>> wall_;
    std::vector<std::vector<std::size_t>> members_;
    std::unordered_map<EntityId, std::size_t> forum_index_;
    std::unordered_map<std::uint64_t, std::size_t> knows_of_;
    std::unordered_set<std::uint64_t> member_pairs_;
};

} // namespace

TemporalGraph generate_temporal_graph(const GenConfig& config) {
    config.validate();
    return Generator(config).run();
}

// ---- cutoff split ---------------------------------------------------------------------------

SimInstant cutoff_instant(const GenConfig& config) {
    const auto span = static_cast<long double>((config.simulation_end - config.simulation_start).millis);
    const auto offset = static_cast<std::int64_t>(std::floor(span * static_cast<long double>(config.cutoff_fraction)));
    return floor_to_day(config.simulation_start + SimDuration{offset});
}

namespace {

/// Unified handle over all entity vectors of a TemporalGraph, with cascade children.
class CascadeIndex {
public:
    enum Kind : std::uint8_t { kPerson, kKnows, kForum, kMember, kMessage, kLike };
    struct Ref {
        Kind kind;
        std::size_t idx;
    };

    CascadeIndex(const TemporalGraph& g, ModeratorDeletionPolicy policy) : g_(g) {
        for (std::size_t i = 0; i < g.persons.size(); ++i) persons_.emplace(g.persons[i].id, i);
        for (std::size_t i = 0; i < g.forums.size(); ++i) forums_.emplace(g.forums[i].id, i);
        for (std::size_t i = 0; i < g.messages.size(); ++i) messages_.emplace(g.messages[i].id, i);
        person_children_.resize(g.persons.size());
        forum_children_.resize(g.forums.size());
        message_children_.resize(g.messages.size());
        for (std::size_t i = 0; i < g.knows.size(); ++i) {
            knows_.emplace(key(g.knows[i].person1_id, g.knows[i].person2_id), i);
            add(person_children_, persons_, g.knows[i].person1_id, {kKnows, i});
            add(person_children_, persons_, g.knows[i].person2_id, {kKnows, i});
        }
        for (std::size_t i = 0; i < g.forums.size(); ++i)
            if (policy == ModeratorDeletionPolicy::DeleteForum)
                add(person_children_, persons_, g.forums[i].moderator_person_id, {kForum, i});
        for (std::size_t i = 0; i < g.memberships.size(); ++i) {
            members_.emplace(key(g.memberships[i].forum_id, g.memberships[i].person_id), i);
            add(person_children_, persons_, g.memberships[i].person_id, {kMember, i});
            add(forum_children_, forums_, g.memberships[i].forum_id, {kMember, i});
        }
        for (std::size_t i = 0; i < g.messages.size(); ++i) {
            const Message& m = g.messages[i];
            add(person_children_, persons_, m.creator_person_id, {kMessage, i});
            if (m.is_post()) add(forum_children_, forums_, *m.container_forum_id, {kMessage, i});
            else add(message_children_, messages_, *m.reply_to_message_id, {kMessage, i});
        }
        for (std::size_t i = 0; i < g.likes.size(); ++i) {
            likes_.emplace(key(g.likes[i].person_id, g.likes[i].message_id), i);
            add(person_children_, persons_, g.likes[i].person_id, {kLike, i});
            add(message_children_, messages_, g.likes[i].message_id, {kLike, i});
        }
    }

    Ref resolve(const DeletionRoot& root) const {
        switch (op_number(root.type)) {
        case 1: return {kPerson, persons_.at(root.first)};
        case 2:
        case 3: return {kLike, likes_.at(key(root.first, root.second))};
        case 4: return {kForum, forums_.at(root.first)};
        case 5: return {kMember, members_.at(key(root.first, root.second))};
        case 6:
        case 7: return {kMessage, messages_.at(root.first)};
        default: return {kKnows, knows_.at(key(root.first, root.second))};
        }
    }

    const Lifecycle& lifecycle(Ref r) const {
        switch (r.kind) {
        case kPerson: return g_.persons[r.idx].lifecycle;
        case kKnows: return g_.knows[r.idx].lifecycle;
        case kForum: return g_.forums[r.idx].lifecycle;
        case kMember: return g_.memberships[r.idx].lifecycle;
        case kMessage: return g_.messages[r.idx].lifecycle;
        default: return g_.likes[r.idx].lifecycle;
        }
    }

    /// Latest creation among the root and everything its deletion cascades to.
    SimInstant latest_creation_in_cascade(Ref root, SimInstant at) const {
        SimInstant latest = lifecycle(root).creation;
        std::vector<Ref> stack{root};
        while (!stack.empty()) {
            const Ref r = stack.back();
            stack.pop_back();
            for (const Ref& c : children(r)) {
                const Lifecycle& l = lifecycle(c);
                if (l.deletion && *l.deletion == at) {
                    latest = std::max(latest, l.creation);
                    stack.push_back(c);
                }
            }
        }
        return latest;
    }

private:
    static std::uint64_t key(EntityId a, EntityId b) {
        return (static_cast<std::uint64_t>(a) << 32) ^ static_cast<std::uint64_t>(b);
    }

    static void add(std::vector<std::vector<Ref>>& lists, const std::unordered_map<EntityId, std::size_t>& index,
                    EntityId parent, Ref child) {
        auto it = index.find(parent);
        if (it != index.end()) lists[it->second].push_back(child);
    }

    const std::vector<Ref>& children(Ref r) const {
        static const std::vector<Ref> none;
        switch (r.kind) {
        case kPerson: return person_children_[r.idx];
        case kForum: return forum_children_[r.idx];
        case kMessage: return message_children_[r.idx];
        default: return none;
        }
    }

    const TemporalGraph& g_;
    std::unordered_map<EntityId, std::size_t> persons_, forums_, messages_;
    std::unordered_map<std::uint64_t, std::size_t> knows_, members_, likes_;
    std::vector<std::vector<Ref>> person_children_, forum_children_, message_children_;
};

template <typename T>
T at_cutoff(T entity) {
    entity.lifecycle.deletion.reset();
    return entity;
}

struct Splitter {
    const TemporalGraph& g;
    SimInstant cutoff;
    SimInstant start;
    SnapshotAndStream out;
    std::unordered_map<EntityId, SimInstant> created;

    Splitter(const TemporalGraph& graph, SimInstant c, SimInstant s) : g(graph), cutoff(c), start(s) {
        out.cutoff = cutoff;
        for (const auto& p : g.persons) created.emplace(p.id, p.lifecycle.creation);
        for (const auto& f : g.forums) created.emplace(f.id, f.lifecycle.creation);
        for (const auto& m : g.messages) created.emplace(m.id, m.lifecycle.creation);
    }

    SimInstant dependency(std::initializer_list<EntityId> ids) const {
        SimInstant latest = start;
        for (EntityId id : ids) latest = std::max(latest, created.at(id));
        return latest;
    }

    /// Routes one entity to the snapshot, the stream, or neither.
    template <typename T>
    void route(const T& e, std::vector<T>& snapshot, OpType ins, std::initializer_list<EntityId> deps) {
        const Lifecycle& l = e.lifecycle;
        if (l.creation < cutoff) {
            if (l.deletion && *l.deletion < cutoff) ++out.deleted_before_cutoff;
            else snapshot.push_back(at_cutoff(e));
            return;
        }
        out.stream.push_back({ins, l.creation, dependency(deps), Payload{at_cutoff(e)}});
    }
};

template <typename T>
Payload payload_of(const std::vector<T>& v, std::size_t idx) {
    return Payload{at_cutoff(v[idx])};
}

} // namespace

SnapshotAndStream split_at_cutoff(const TemporalGraph& g, const GenConfig& config) {
    Splitter s(g, cutoff_instant(config), config.simulation_start);
    auto& snap = s.out.snapshot;
    std::unordered_map<EntityId, bool> is_post;
    for (const auto& m : g.messages) is_post.emplace(m.id, m.is_post());

    for (const auto& p : g.persons) s.route(p, snap.persons, OpType::Ins1, {});
    for (const auto& k : g.knows) s.route(k, snap.knows, OpType::Ins8, {k.person1_id, k.person2_id});
    for (const auto& f : g.forums) s.route(f, snap.forums, OpType::Ins4, {f.moderator_person_id});
    for (const auto& hm : g.memberships) s.route(hm, snap.memberships, OpType::Ins5, {hm.forum_id, hm.person_id});
    for (const auto& m : g.messages) {
        if (m.is_post()) s.route(m, snap.messages, OpType::Ins6, {m.creator_person_id, *m.container_forum_id});
        else s.route(m, snap.messages, OpType::Ins7, {m.creator_person_id, *m.reply_to_message_id});
    }
    for (const auto& l : g.likes)
        s.route(l, snap.likes, is_post.at(l.message_id) ? OpType::Ins2 : OpType::Ins3, {l.person_id, l.message_id});

    const CascadeIndex index(g, config.moderator_policy);
    for (const auto& root : g.deletion_roots) {
        if (root.at < s.out.cutoff) continue;
        const auto ref = index.resolve(root);
        Payload payload;
        switch (ref.kind) {
        case CascadeIndex::kPerson: payload = payload_of(g.persons, ref.idx); break;
        case CascadeIndex::kKnows: payload = payload_of(g.knows, ref.idx); break;
        case CascadeIndex::kForum: payload = payload_of(g.forums, ref.idx); break;
        case CascadeIndex::kMember: payload = payload_of(g.memberships, ref.idx); break;
        case CascadeIndex::kMessage: payload = payload_of(g.messages, ref.idx); break;
        case CascadeIndex::kLike: payload = payload_of(g.likes, ref.idx); break;
        }
        s.out.stream.push_back({root.type, root.at, index.latest_creation_in_cascade(ref, root.at), std::move(payload)});
    }

    s.out.stream = enforce_t_safe(std::move(s.out.stream), config.t_safe, config.simulation_end);
    return std::move(s.out);
}

// ---- dependency separation -------------------------------------------------------------------

namespace {

std::pair<EntityId, EntityId> primary_key(const Payload& p) {
    return std::visit(
        [](const auto& e) -> std::pair<EntityId, EntityId> {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, KnowsEdge>) return {e.person1_id, e.person2_id};
            else if constexpr (std::is_same_v<T, LikesEdge>) return {e.person_id, e.message_id};
            else if constexpr (std::is_same_v<T, HasMemberEdge>) return {e.forum_id, e.person_id};
            else return {e.id, 0};
        },
        p);
}

} // namespace

std::vector<UpdateOperation> enforce_t_safe(std::vector<UpdateOperation> stream, SimDuration t_safe,
                                            SimInstant simulation_end) {
    for (auto& op : stream) {
        if (op.scheduled_time - op.dependency_time >= t_safe) continue;
        const SimInstant shifted = op.dependency_time + t_safe;
        if (shifted > simulation_end)
            throw UnsatisfiableDependency(op_name(op.type) + " at " + to_iso(op.scheduled_time) +
                                          " cannot be separated from its dependency at " +
                                          to_iso(op.dependency_time));
        op.scheduled_time = shifted;
    }
    std::stable_sort(stream.begin(), stream.end(), [](const UpdateOperation& a, const UpdateOperation& b) {
        if (a.scheduled_time != b.scheduled_time) return a.scheduled_time < b.scheduled_time;
        if (is_delete(a.type) != is_delete(b.type)) return is_insert(a.type);
        if (a.type != b.type) return a.type < b.type;
        return primary_key(a.payload) < primary_key(b.payload);
    });
    return stream;
}

std::vector<EntityId> referenced_entities(const UpdateOperation& op) {
    return std::visit(
        [&](const auto& e) -> std::vector<EntityId> {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, Person>) return is_delete(op.type) ? std::vector{e.id} : std::vector<EntityId>{};
            else if constexpr (std::is_same_v<T, Forum>) {
                if (is_delete(op.type)) return {e.id};
                return {e.moderator_person_id};
            } else if constexpr (std::is_same_v<T, Message>) {
                if (is_delete(op.type)) return {e.id};
                return {e.creator_person_id, e.is_post() ? *e.container_forum_id : *e.reply_to_message_id};
            } else if constexpr (std::is_same_v<T, KnowsEdge>) return {e.person1_id, e.person2_id};
            else if constexpr (std::is_same_v<T, LikesEdge>) return {e.person_id, e.message_id};
            else return {e.forum_id, e.person_id};
        },
        op.payload);
}

} // namespace snb
