#pragma once

#include <cstdint>
#include <vector>

#include "oulab/distance.hpp"
#include "oulab/moments.hpp"
#include "oulab/process.hpp"

// Deterministic parallel generation of estimator-error ensembles.
// Replication k always uses the stream (master_seed, k) and writes into
// slot k, so the ensemble bytes are identical for any worker count.
namespace oulab {

struct ReplicationEnsemble {
    // slot-per-replication arrays; excluded[k] != 0 marks a degenerate
    // denominator and leaves the value slots unusable
    std::vector<double> values;       // sqrt(T/(2 theta)) (theta - estimate)
    std::vector<double> numerators;   // ratio numerator per the bound decomposition
    std::vector<double> denominators; // ratio denominator, -> 1 in probability
    std::vector<std::uint8_t> excluded;
    std::uint64_t excluded_count = 0;

    // ensemble views with degenerate replications dropped
    SampleEnsemble value_ensemble(std::uint64_t master_seed, std::string description) const;
    SampleEnsemble numerator_ensemble(std::uint64_t master_seed, std::string description) const;
    SampleEnsemble denominator_ensemble(std::uint64_t master_seed, std::string description) const;
};

ReplicationEnsemble generate_error_ensemble(Application application, const OuParams& params,
                                            const SamplingGrid& grid, std::uint64_t replications,
                                            std::uint64_t master_seed, int workers);

}  // namespace oulab
