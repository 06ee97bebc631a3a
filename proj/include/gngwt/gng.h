#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gngwt/cloud_io.h"
#include "gngwt/spatial_index.h"
#include "gngwt/types.h"

namespace gngwt {

/// The six tunable scalars of the modified Growing Neural Gas.
struct GngParams {
    double eps_b = 0.2;     // winner step towards the signal
    double eps_n = 0.006;   // step of the winner's graph neighbors
    double t_gamma = 3.0;   // accumulated error that triggers an insertion
    int a_max = 60;         // edges older than this are removed
    double alpha = 0.5;     // error reduction of the split neurons
    double d = 0.995;       // per-signal error decay of all neurons

    /// Fritzke-style starting point used to seed the optimizer.
    static GngParams seed() { return {}; }
    /// Values reported as the optimizer's result on the synthetic prototype.
    static GngParams published_optimum() { return {0.0739138, 0.00870156, 2.72645, 133, 0.521687, 0.999321}; }

    /// Throws InvalidArgument when a field leaves its admissible range or eps_n > eps_b.
    void validate() const;

    friend bool operator==(const GngParams&, const GngParams&) = default;
};

struct EdgeRef {
    int to = -1;
    int age = 0;
};

/// Graph of neurons (position + accumulated error) and aged undirected edges.
///
/// Neuron indices are dense. Removing a neuron moves the last neuron into the freed slot.
/// Accumulated errors are expressed in squared multiples of `error_unit()` meters, so the
/// insertion threshold does not depend on the absolute size of the object.
class GngModel {
public:
    explicit GngModel(double error_unit = 1.0);

    int size() const { return static_cast<int>(positions_.size()); }
    std::size_t edge_count() const { return edge_count_; }
    double error_unit() const { return error_unit_; }

    const Vec3& position(int i) const { return positions_[i]; }
    void set_position(int i, const Vec3& p);
    const std::vector<Vec3>& positions() const { return positions_; }

    double error(int i) const { return errors_[i]; }
    void set_error(int i, double e) { errors_[i] = e; }
    void scale_errors(double factor);

    std::span<const EdgeRef> neighbors(int i) const { return adjacency_[i]; }

    /// Buckets neurons in a uniform grid with the given cell size to speed up nearest_two.
    void enable_grid(double cell);
    /// Nearest and second-nearest neuron to `p`, ties broken by lower index. Needs two neurons.
    std::pair<int, int> nearest_two(const Vec3& p) const;

    int add_neuron(const Vec3& position, double error = 0.0);
    /// Removes neuron `i` and its edges. The neuron previously stored last now lives at `i`;
    /// returns that neuron's former index, or -1 when `i` was last.
    int remove_neuron(int i);

    /// Creates the edge with age 0, or resets its age if it already exists.
    void connect(int a, int b);
    bool disconnect(int a, int b);
    bool connected(int a, int b) const;
    /// Age of edge (a, b); -1 when absent.
    int edge_age(int a, int b) const;
    void set_edge_age(int a, int b, int age);
    void age_edges_of(int i);

    /// Number of neurons created by error-driven insertion.
    std::size_t insertions() const { return insertions_; }
    void count_insertion() { ++insertions_; }

    /// Throws Error when an invariant is violated (dangling edge, self loop, duplicate edge,
    /// asymmetric age, negative or non-finite error).
    void check_invariants() const;

    friend bool operator==(const GngModel& a, const GngModel& b);

private:
    EdgeRef* find_edge(int a, int b);
    std::uint64_t grid_key(const Vec3& p) const;
    void grid_insert(int i);
    void grid_erase(int i);
    std::pair<int, int> nearest_two_linear(const Vec3& p) const;

    double error_unit_ = 1.0;
    std::vector<Vec3> positions_;
    std::vector<double> errors_;
    std::vector<std::vector<EdgeRef>> adjacency_;
    std::size_t edge_count_ = 0;
    std::size_t insertions_ = 0;

    double cell_ = 0.0;  // 0 when the grid is off
    std::unordered_map<std::uint64_t, std::vector<int>> cells_;
    std::vector<std::uint64_t> cell_key_;
};

/// A cloud prepared for training: spatial index and resolution are computed once and
/// shared read-only by every model trained on it.
class TrainingCloud {
public:
    explicit TrainingCloud(PointCloud cloud);

    const PointCloud& cloud() const { return cloud_; }
    const SpatialIndex& index() const { return index_; }
    double spacing() const { return spacing_; }
    double diagonal() const { return diagonal_; }

private:
    PointCloud cloud_;
    SpatialIndex index_;
    double spacing_;
    double diagonal_;
};

struct TrainingOptions {
    std::optional<double> noise_sigma;      // default: noise_fraction * median spacing
    double noise_fraction = 0.25;
    double divergence_factor = 10.0;        // diverted if farther than this many spacings
    std::size_t max_signals_per_epoch = 100000;
    int max_epochs = 200;
    std::size_t neuron_budget = 20000;      // exceeding it raises GngFailure
    double max_neurons_per_point = 0.5;     // further budget relative to the cloud size
    double error_unit_divisions = 20.0;     // error unit = bounding-box diagonal / this
};

struct EpochRecord {
    int epoch = 0;
    double epsilon = 0.0;
    std::size_t neurons = 0;
    std::size_t edges = 0;
};

struct EpochTrace {
    std::vector<EpochRecord> epochs;

    /// "epoch,epsilon,neurons,edges" header plus one row per epoch.
    std::string to_csv() const;
};

struct ReconstructResult {
    GngModel model;
    EpochTrace trace;
    int best_epoch = 0;
    bool converged = false;  // false when the epoch cap ended training
};

using Rng = std::mt19937_64;

/// Two neurons at distinct random cloud points joined by one edge of age 0.
GngModel init_model(const PointCloud& cloud, std::uint64_t seed, double error_unit = 1.0);
GngModel init_model(const PointCloud& cloud, Rng& rng, double error_unit);

/// One adapted GNG step for a single signal. Returns true if a neuron was inserted.
bool present_signal(GngModel& model, const GngParams& params, const Vec3& signal);

/// Presents min(|cloud|, max_signals_per_epoch) noisy signals, then removes neurons farther
/// than the divergence threshold from the cloud. Returns the number of removed neurons.
std::size_t train_epoch(GngModel& model, const GngParams& params, const TrainingCloud& cloud,
                        double noise_sigma, Rng& rng, const TrainingOptions& options = {});

/// Mean distance from the neurons to their nearest cloud point.
double consistency_error(const GngModel& model, const SpatialIndex& cloud_index);

/// Epoch loop that stops at the first epoch whose consistency error exceeds its
/// predecessor's, returning the lowest-error state seen.
ReconstructResult reconstruct(const TrainingCloud& cloud, const GngParams& params, std::uint64_t seed,
                              const TrainingOptions& options = {});
ReconstructResult reconstruct(const PointCloud& cloud, const GngParams& params, std::uint64_t seed,
                              const TrainingOptions& options = {});

/// All 3-cliques of the graph as triangles over the neuron positions. Orientation is arbitrary.
TriangleMesh extract_faces(const GngModel& model);

}  // namespace gngwt
