#pragma once

#include "sphw/forces.hpp"
#include "sphw/init.hpp"
#include "sphw/integrator.hpp"
#include "sphw/kernels.hpp"
#include "sphw/particles.hpp"
#include "sphw/transport.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sphw {

enum class Family { Expansion1D, RotatingSquare2D, Morse2D };

std::string to_string(Family f);
Family family_from_string(std::string_view name);
int family_dim(Family f);

/// Largest resolution index run without the full-scale flag.
int desk_scale_cap(Family f);
/// Largest resolution index accepted at all.
int full_scale_cap(Family f);

struct ExperimentPlan {
    Family family = Family::Expansion1D;
    double gamma = 2.0;
    double k_eos = 1.0;
    int theta = 1;
    SmoothingLength h_mode = SmoothingLength::fixed(1.0);
    /// Resolution indices; n = 2^k in 1D and 4^k in 2D.
    std::vector<int> resolutions{1, 2, 3};
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t snapshots = 10;
    double eta = 0.0;
    MorseInteraction morse;
    InitMode init_mode = InitMode::Equipartition;
    std::uint64_t seed = 0;
    bool full_scale = false;

    int dim() const { return family_dim(family); }
    bool is_hydro() const { return family != Family::Morse2D; }
    std::size_t particle_count(int k) const;
    /// Throws InvalidParameter naming the offending field.
    void validate() const;

    /// Settings used by the published runs of each family.
    static ExperimentPlan defaults(Family f);
};

/// Initial construction, kernel and physics for one resolution.
InitialSpec initial_spec(const ExperimentPlan& plan, int k);
ForceModel force_model(const ExperimentPlan& plan);
Kernel plan_kernel(const ExperimentPlan& plan, const InitialSpec& spec);
IntegratorConfig integrator_config(const ExperimentPlan& plan);

struct ResolutionRun {
    int k = 0;
    std::size_t n = 0;
    double h = 0.0;
    Trajectory snapshots;
    SupportDiagnostic support;
    /// False if some snapshot leaves the a-priori support ball.
    bool support_ok = true;
    double final_max_speed = 0.0;
    double seconds = 0.0;
};

ResolutionRun run_resolution(const ExperimentPlan& plan, int k, const EvalOptions& opt = {});

struct PairDistance {
    int k = 0; ///< coarser resolution of the pair
    std::size_t n = 0;
    SupResult sup;
};

struct StudyResult {
    ExperimentPlan plan;
    std::vector<ResolutionRun> runs;
    std::vector<PairDistance> pairs;
    RateTable rates;
};

using ProgressFn = std::function<void(std::string_view)>;

/// Runs every resolution, the sup-in-time distance of each consecutive
/// pair and the rates. Independent resolutions run on up to `parallel_runs`
/// threads; each simulation uses `opt.workers` for its own force loops.
/// A diverging simulation aborts the study with a DivergenceError naming
/// the family and resolution.
StudyResult run_convergence_study(const ExperimentPlan& plan, const EvalOptions& opt = {},
                                  int parallel_runs = 1, const ProgressFn& progress = {});

struct DensityProfile {
    std::vector<Vec2> points;
    std::vector<double> values;
};

/// rho(xi) = sum_j m_j W_h(xi - x_j) on the given grid.
DensityProfile density_profile(const ParticleState& p, const Kernel& k, std::span<const Vec2> grid);

/// count equally spaced points on [lo, hi] (1D, y = 0).
std::vector<Vec2> line_grid(double lo, double hi, std::size_t count);
/// count x count tensor grid over the box [lo, hi].
std::vector<Vec2> square_grid(const Vec2& lo, const Vec2& hi, std::size_t count);
/// Trapezoid integral of a 1D profile on a sorted line grid.
double trapezoid_mass(const DensityProfile& profile);

/// Snapshot table with columns t,id,x0..,v0..,rho,mass.
void write_snapshot_csv(const ParticleState& p, std::span<const double> rho, std::ostream& os);
/// Reads a snapshot table back as a point cloud. Columns are located by
/// header; x1 is optional (1D), and weights default to uniform when the
/// mass column is absent. Throws InvalidParameter with the line number on
/// malformed rows.
DiscreteMeasure read_snapshot_csv(std::istream& is, const std::string& source = "<stream>");
void write_profile_csv(const DensityProfile& profile, int dim, std::ostream& os);

/// Output files of a finished study:
///   rates.csv, distances.csv, snapshots/k<k>_s<j>.csv, manifest.json.
/// `config_json` is embedded in the manifest verbatim.
void emit_report(const StudyResult& study, const std::filesystem::path& dir, const std::string& config_json);

} // namespace sphw
