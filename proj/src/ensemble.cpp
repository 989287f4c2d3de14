#include "oulab/ensemble.hpp"

#include <cmath>
#include <utility>

#include "oulab/parallel.hpp"
#include "oulab/sampler.hpp"

namespace oulab {

namespace {

SampleEnsemble filtered(const std::vector<double>& slots,
                        const std::vector<std::uint8_t>& excluded, std::uint64_t excluded_count,
                        std::uint64_t master_seed, std::string description) {
    SampleEnsemble out;
    out.master_seed = master_seed;
    out.description = std::move(description);
    out.excluded_count = excluded_count;
    out.values.reserve(slots.size());
    for (std::size_t i = 0; i < slots.size(); ++i)
        if (!excluded[i]) out.values.push_back(slots[i]);
    return out;
}

}  // namespace

SampleEnsemble ReplicationEnsemble::value_ensemble(std::uint64_t master_seed,
                                                   std::string description) const {
    return filtered(values, excluded, excluded_count, master_seed, std::move(description));
}

SampleEnsemble ReplicationEnsemble::numerator_ensemble(std::uint64_t master_seed,
                                                       std::string description) const {
    return filtered(numerators, excluded, excluded_count, master_seed, std::move(description));
}

SampleEnsemble ReplicationEnsemble::denominator_ensemble(std::uint64_t master_seed,
                                                         std::string description) const {
    return filtered(denominators, excluded, excluded_count, master_seed, std::move(description));
}

ReplicationEnsemble generate_error_ensemble(Application application, const OuParams& params,
                                            const SamplingGrid& grid, std::uint64_t replications,
                                            std::uint64_t master_seed, int workers) {
    const double theta = params.theta;
    const double t_horizon = grid.horizon();
    const double n = static_cast<double>(grid.n);
    const double norm = std::sqrt(t_horizon / (2.0 * theta));

    ReplicationEnsemble out;
    out.values.assign(replications, 0.0);
    out.numerators.assign(replications, 0.0);
    out.denominators.assign(replications, 0.0);
    out.excluded.assign(replications, 0);

    parallel_for_index(replications, workers, [&](std::uint64_t rep) {
        const RngStreamSpec stream{master_seed, rep};
        double sum_sq_from_one = 0.0;  // sum_{i=1..n} x_i^2
        double sum_sq_prev = 0.0;      // sum_{i=1..n} x_{i-1}^2
        double quad = 0.0;
        double x_prev = 0.0;
        double x_last = 0.0;
        for_each_coupled_observation(params, grid, stream,
                                     [&](std::size_t i, double x, double /*z*/) {
                                         if (i > 0) {
                                             sum_sq_from_one += x * x;
                                             sum_sq_prev += x_prev * x_prev;
                                             quad += x_prev * (x - x_prev);
                                         }
                                         x_prev = x;
                                         x_last = x;
                                     });

        switch (application) {
            case Application::kAmce: {
                const double q2 = 2.0 * sum_sq_from_one / n;
                if (!(q2 > 0.0)) {
                    out.excluded[rep] = 1;
                    return;
                }
                out.values[rep] = norm * (theta - 1.0 / q2);
                out.numerators[rep] = theta * norm * (theta * q2 - 1.0);
                out.denominators[rep] = theta * q2;
                break;
            }
            case Application::kAmleHat: {
                const double s_n = grid.delta * sum_sq_prev;
                if (!(s_n > 0.0)) {
                    out.excluded[rep] = 1;
                    return;
                }
                const double estimate = -quad / s_n;
                out.values[rep] = norm * (theta - estimate);
                out.numerators[rep] =
                    std::sqrt(2.0 * theta / t_horizon) * (quad + theta * s_n);
                out.denominators[rep] = 2.0 * theta * sum_sq_prev / n;
                break;
            }
            case Application::kAmleBar: {
                const double s_n = grid.delta * sum_sq_prev;
                if (!(s_n > 0.0)) {
                    out.excluded[rep] = 1;
                    return;
                }
                const double ito = 0.5 * (x_last * x_last - t_horizon);
                const double estimate = -ito / s_n;
                out.values[rep] = norm * (theta - estimate);
                out.numerators[rep] = std::sqrt(2.0 * theta / t_horizon) * (ito + theta * s_n);
                out.denominators[rep] = 2.0 * theta * sum_sq_prev / n;
                break;
            }
        }
    });

    for (std::uint64_t rep = 0; rep < replications; ++rep)
        if (out.excluded[rep]) ++out.excluded_count;
    return out;
}

}  // namespace oulab
