#include "fp8ann/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "distance.hpp"

namespace fp8ann {

namespace {

using detail::l2_sqr_blocked;

void check_finite(const VectorSet& data) {
    for (const float v : data.data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("kmeans: non-finite input");
        }
    }
}

struct Nearest {
    std::uint32_t index;
    float distance;
};

Nearest find_nearest(const float* x, const VectorSet& centroids) {
    Nearest best{0, std::numeric_limits<float>::infinity()};
    for (std::size_t c = 0; c < centroids.n; ++c) {
        const float dist = l2_sqr_blocked(x, centroids.data.data() + c * centroids.d, centroids.d);
        if (dist < best.distance) {
            best = {static_cast<std::uint32_t>(c), dist};
        }
    }
    return best;
}

// Greedy k-means++: the first centre is uniform; each later centre is the best
// (lowest resulting potential) of several candidates drawn proportionally to
// squared distance from the closest chosen centre.
VectorSet seed_plus_plus(const VectorSet& data, std::size_t k, std::mt19937_64& rng) {
    VectorSet centroids(k, data.d);
    std::vector<double> closest(data.n);
    std::vector<double> trial_closest(data.n);
    std::vector<double> best_closest(data.n);
    std::vector<bool> chosen(data.n, false);
    const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));

    const auto sample = [&](double total) {
        const double target = std::uniform_real_distribution<double>(0.0, total)(rng);
        double running = 0.0;
        std::size_t last_positive = data.n;
        for (std::size_t i = 0; i < data.n; ++i) {
            if (closest[i] > 0.0) {
                running += closest[i];
                last_positive = i;
                if (running > target) {
                    return i;
                }
            }
        }
        return last_positive;  // rounding at the tail
    };
    const auto distances_to = [&](std::size_t candidate, std::vector<double>& out) {
        double potential = 0.0;
        for (std::size_t i = 0; i < data.n; ++i) {
            const double dist = l2_sqr_blocked(data.row(i).data(), data.row(candidate).data(), data.d);
            out[i] = std::min(closest[i], dist);
            potential += out[i];
        }
        return potential;
    };

    std::size_t pick = std::uniform_int_distribution<std::size_t>(0, data.n - 1)(rng);
    std::fill(closest.begin(), closest.end(), std::numeric_limits<double>::infinity());
    distances_to(pick, closest);
    for (std::size_t c = 0;; ++c) {
        chosen[pick] = true;
        std::copy_n(data.row(pick).begin(), data.d, centroids.row(c).begin());
        if (c + 1 == k) {
            break;
        }
        const double total = std::accumulate(closest.begin(), closest.end(), 0.0);
        if (total > 0.0) {
            double best_potential = std::numeric_limits<double>::infinity();
            for (std::size_t t = 0; t < trials; ++t) {
                const auto candidate = sample(total);
                const double potential = distances_to(candidate, trial_closest);
                if (potential < best_potential) {
                    best_potential = potential;
                    pick = candidate;
                    best_closest.swap(trial_closest);
                }
            }
            closest.swap(best_closest);
        } else {
            // Every point coincides with a chosen centre; take the first unused row.
            pick = static_cast<std::size_t>(std::find(chosen.begin(), chosen.end(), false) - chosen.begin());
        }
    }
    return centroids;
}

double assign(const VectorSet& data, const VectorSet& centroids, std::vector<std::uint32_t>& assignments,
              std::vector<float>& distances) {
    double objective = 0.0;
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto best = find_nearest(data.row(i).data(), centroids);
        assignments[i] = best.index;
        distances[i] = best.distance;
        objective += best.distance;
    }
    return objective;
}

// Moves the farthest point of a multi-point cluster into each empty cluster.
// Returns the objective after repair.
double repair_empty(const VectorSet& data, VectorSet& centroids, std::vector<std::uint32_t>& assignments,
                    std::vector<float>& distances, double objective) {
    std::vector<std::size_t> sizes(centroids.n, 0);
    for (const auto a : assignments) {
        ++sizes[a];
    }
    for (std::size_t c = 0; c < centroids.n; ++c) {
        if (sizes[c] != 0) {
            continue;
        }
        std::size_t far = data.n;
        for (std::size_t i = 0; i < data.n; ++i) {
            if (sizes[assignments[i]] > 1 && (far == data.n || distances[i] > distances[far])) {
                far = i;
            }
        }
        if (far == data.n) {
            throw std::logic_error("kmeans: no point available for empty-cluster repair");
        }
        --sizes[assignments[far]];
        ++sizes[c];
        std::copy_n(data.row(far).begin(), data.d, centroids.row(c).begin());
        objective -= distances[far];
        assignments[far] = static_cast<std::uint32_t>(c);
        distances[far] = 0.0f;
    }
    return objective;
}

// Recomputes means (double accumulation, row order). Returns the largest
// centroid displacement relative to the mean centroid norm.
double update_centroids(const VectorSet& data, VectorSet& centroids, const std::vector<std::uint32_t>& assignments) {
    const std::size_t d = data.d;
    std::vector<double> sums(centroids.n * d, 0.0);
    std::vector<std::size_t> counts(centroids.n, 0);
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto c = assignments[i];
        const auto x = data.row(i);
        ++counts[c];
        for (std::size_t j = 0; j < d; ++j) {
            sums[c * d + j] += x[j];
        }
    }
    double max_shift = 0.0;
    double norm_total = 0.0;
    for (std::size_t c = 0; c < centroids.n; ++c) {
        auto centroid = centroids.row(c);
        double shift = 0.0;
        double norm = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const auto updated = static_cast<float>(sums[c * d + j] / static_cast<double>(counts[c]));
            const double delta = static_cast<double>(updated) - centroid[j];
            shift += delta * delta;
            norm += static_cast<double>(updated) * updated;
            centroid[j] = updated;
        }
        max_shift = std::max(max_shift, std::sqrt(shift));
        norm_total += std::sqrt(norm);
    }
    const double mean_norm = norm_total / static_cast<double>(centroids.n);
    if (mean_norm == 0.0) {
        return max_shift == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return max_shift / mean_norm;
}

}  // namespace

std::uint32_t nearest_centroid(std::span<const float> x, const VectorSet& centroids) {
    if (x.size() != centroids.d) {
        throw std::invalid_argument("nearest_centroid: dimension mismatch");
    }
    return find_nearest(x.data(), centroids).index;
}

KMeansResult kmeans(const VectorSet& data, const KMeansParams& params) {
    if (params.k < 1 || params.max_iters < 1 || !(params.tol >= 0.0f)) {
        throw std::invalid_argument("kmeans: invalid parameters");
    }
    if (data.n < params.k) {
        throw std::invalid_argument("kmeans: " + std::to_string(data.n) + " points for " +
                                    std::to_string(params.k) + " clusters");
    }
    check_finite(data);

    std::mt19937_64 rng(params.seed);
    KMeansResult result;
    result.centroids = seed_plus_plus(data, params.k, rng);
    result.assignments.assign(data.n, 0);
    std::vector<float> distances(data.n);

    for (std::size_t it = 0; it < params.max_iters; ++it) {
        double objective = assign(data, result.centroids, result.assignments, distances);
        objective = repair_empty(data, result.centroids, result.assignments, distances, objective);
        result.objective.push_back(objective);
        const double shift = update_centroids(data, result.centroids, result.assignments);
        result.iterations = it + 1;
        if (shift < params.tol) {
            break;
        }
    }
    double objective = assign(data, result.centroids, result.assignments, distances);
    objective = repair_empty(data, result.centroids, result.assignments, distances, objective);
    result.objective.push_back(objective);
    return result;
}

VectorSet train_coarse(const VectorSet& data, std::size_t nlist, std::uint64_t seed) {
    return kmeans(data, KMeansParams{nlist, 25, seed, 1e-4f}).centroids;
}

VectorSet compute_residuals(const VectorSet& data, const VectorSet& centroids,
                            std::span<const std::uint32_t> assignments) {
    if (data.d != centroids.d || assignments.size() != data.n) {
        throw std::invalid_argument("compute_residuals: shape mismatch");
    }
    VectorSet out(data.n, data.d);
    for (std::size_t i = 0; i < data.n; ++i) {
        if (assignments[i] >= centroids.n) {
            throw std::out_of_range("compute_residuals: assignment " + std::to_string(assignments[i]) +
                                    " out of range");
        }
        const auto x = data.row(i);
        const auto c = centroids.row(assignments[i]);
        auto r = out.row(i);
        for (std::size_t j = 0; j < data.d; ++j) {
            r[j] = x[j] - c[j];
        }
    }
    return out;
}

std::uint64_t subspace_seed(std::uint64_t seed, std::size_t j) {
    // splitmix64 step over (seed, j)
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (j + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

VectorSet subspace_slice(const VectorSet& data, std::size_t j, std::size_t sub_d) {
    VectorSet out(data.n, sub_d);
    for (std::size_t i = 0; i < data.n; ++i) {
        const auto x = data.row(i).subspan(j * sub_d, sub_d);
        std::copy(x.begin(), x.end(), out.row(i).begin());
    }
    return out;
}

PQCodebook train_pq(const VectorSet& residuals, std::size_t s, std::size_t p, std::uint64_t seed) {
    if (s == 0 || residuals.d % s != 0) {
        throw std::invalid_argument("d not divisible by s (d=" + std::to_string(residuals.d) +
                                    ", s=" + std::to_string(s) + ")");
    }
    if (p < 1 || p > 8) {
        throw std::invalid_argument("PQ bits must be in [1, 8]");
    }
    PQCodebook cb{s, p, residuals.d / s, {}};
    if (residuals.n < cb.ksub()) {
        throw std::invalid_argument("train_pq: need at least " + std::to_string(cb.ksub()) + " training rows, got " +
                                    std::to_string(residuals.n));
    }
    cb.centers.resize(s * cb.ksub() * cb.sub_d);
    for (std::size_t j = 0; j < s; ++j) {
        const auto slice = subspace_slice(residuals, j, cb.sub_d);
        const auto sub = kmeans(slice, KMeansParams{cb.ksub(), 25, subspace_seed(seed, j), 1e-4f});
        std::copy(sub.centroids.data.begin(), sub.centroids.data.end(),
                  cb.centers.begin() + static_cast<std::ptrdiff_t>(j * cb.ksub() * cb.sub_d));
    }
    return cb;
}

void pq_encode(std::span<const float> residual, const PQCodebook& cb, std::span<std::uint8_t> code) {
    if (residual.size() != cb.d() || code.size() != cb.s) {
        throw std::invalid_argument("pq_encode: length mismatch");
    }
    for (std::size_t j = 0; j < cb.s; ++j) {
        const auto sub = residual.subspan(j * cb.sub_d, cb.sub_d);
        std::size_t best = 0;
        float best_dist = std::numeric_limits<float>::infinity();
        for (std::size_t c = 0; c < cb.ksub(); ++c) {
            const float dist = l2_sqr(sub, cb.center(j, c));
            if (dist < best_dist) {
                best_dist = dist;
                best = c;
            }
        }
        code[j] = static_cast<std::uint8_t>(best);
    }
}

std::vector<std::uint8_t> pq_encode(std::span<const float> residual, const PQCodebook& cb) {
    std::vector<std::uint8_t> code(cb.s);
    pq_encode(residual, cb, code);
    return code;
}

std::vector<float> pq_decode(std::span<const std::uint8_t> code, const PQCodebook& cb) {
    if (code.size() != cb.s) {
        throw std::invalid_argument("pq_decode: length mismatch");
    }
    std::vector<float> out(cb.d());
    for (std::size_t j = 0; j < cb.s; ++j) {
        if (code[j] >= cb.ksub()) {
            throw std::out_of_range("pq_decode: code byte out of range");
        }
        const auto c = cb.center(j, code[j]);
        std::copy(c.begin(), c.end(), out.begin() + static_cast<std::ptrdiff_t>(j * cb.sub_d));
    }
    return out;
}

}  // namespace fp8ann
