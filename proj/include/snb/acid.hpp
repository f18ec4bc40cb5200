#pragma once

#include "snb/refstore.hpp"

#include "json.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace snb {

/// The store under test. The two faulty variants exist so the checks can be shown to fail.
enum class AcidStore : std::uint8_t { Reference, ReadLatest, SplitCascade };

std::string_view to_string(AcidStore store);
/// "reference", "read-latest" or "split-cascade".
AcidStore parse_acid_store(std::string_view text);
std::unique_ptr<ReferenceStore> make_acid_store(AcidStore store);

/// Hands out turns to actors in a fixed order; each actor blocks until it is at the head.
class StepSequencer {
public:
    explicit StepSequencer(std::vector<int> order, std::chrono::milliseconds stall = std::chrono::seconds(10));

    /// false when the sequence was aborted or stalled.
    bool wait_turn(int actor);
    void done();
    /// Turns left for `actor`, counting the current one.
    std::size_t remaining(int actor) const;
    void abort();
    bool aborted() const;

private:
    std::vector<int> order_;
    std::size_t pos_ = 0;
    bool aborted_ = false;
    std::chrono::milliseconds stall_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
};

struct InterleavingOutcome {
    std::uint64_t seed = 0;
    bool pass = false;
    std::vector<std::string> order; ///< step labels in execution order
    std::string detail;             ///< first forbidden observation, empty on pass
};

/// n1-n2-n3-n4; Ta pins a snapshot and walks from n1 while Tb deletes n2 and Tc adds n3-n5-n4.
/// Passes iff Ta never observes n5 and sees the graph exactly as of its snapshot.
InterleavingOutcome run_traversal_anomaly(ReferenceStore& store, std::uint64_t seed);

/// A three-level comment thread; readers check it while DEL6 removes the post.
/// Passes iff no reader snapshot holds a comment whose ancestor is gone.
InterleavingOutcome run_cascade_atomicity(ReferenceStore& store, std::uint64_t seed);

std::vector<std::string> acid_scenario_names();

struct ScenarioReport {
    std::string name;
    std::size_t runs = 0;
    std::size_t passed = 0;
    std::vector<InterleavingOutcome> failures; ///< first few only
    bool pass() const { return runs > 0 && passed == runs; }
};

struct AcidReport {
    AcidStore store = AcidStore::Reference;
    std::uint64_t seed = 0;
    std::size_t interleavings = 0;
    std::vector<ScenarioReport> scenarios;

    bool pass() const;
    nlohmann::json to_json() const;
};

/// Runs `interleavings` seeded interleavings of each selected scenario ("all" or a name), each on
/// a fresh store. Throws ConfigInvalid for an unknown scenario.
AcidReport run_acid(AcidStore store, const std::string& scenario, std::uint64_t seed, std::size_t interleavings = 100);

} // namespace snb
