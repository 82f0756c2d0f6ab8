#ifndef DDP_CONFIG_HPP
#define DDP_CONFIG_HPP

/// @file config.hpp
/// @brief Declarative description of one problem instance and its strict
///        JSON surface syntax (unknown keys rejected, ranges checked).

#include "ddp/dynamics.hpp"
#include "ddp/model.hpp"

#include <array>
#include <string>

namespace ddp {

struct SimConfig {
    struct GridCfg {
        int dim = 3;
        double half_width = 8.0;
        int cells = 32;
        bool operator==(const GridCfg&) const = default;
    };

    struct PotentialCfg {
        std::string form = "quadratic"; // quadratic | shifted_quadratic
        std::array<double, 3> center{0.0, 0.0, 0.0};
        double curvature = 1.0;
        double amplitude = 0.0;
        std::array<double, 3> frequency{1.0, 1.0, 1.0};
        bool operator==(const PotentialCfg&) const = default;
    };

    struct DopingCfg {
        std::string kind = "none"; // none | gaussian | two_bump
        double amplitude = 0.0;
        std::array<double, 3> center{0.0, 0.0, 0.0};
        double width = 1.0;
        double amplitude2 = 0.0;
        std::array<double, 3> center2{0.0, 0.0, 0.0};
        double width2 = 1.0;
        bool operator==(const DopingCfg&) const = default;
    };

    struct RecombinationCfg {
        std::string variant = "band_to_band"; // band_to_band | srh | auger
        double c = 1.0;
        double r1 = 1.0, r2 = 1.0, r3 = 1.0;
        double cn = 1.0, cp = 1.0;
        double delta = 1.0;
        double sigma = 0.0;
        bool operator==(const RecombinationCfg&) const = default;
    };

    struct InitialCfg {
        std::string kind = "equilibrium"; // equilibrium | gaussian_perturbation | custom_checkpoint
        double amplitude = 0.5;
        std::array<double, 3> center{0.0, 0.0, 0.0};
        double width = 1.0;
        std::string checkpoint_path;
        bool operator==(const InitialCfg&) const = default;
    };

    struct SteppingCfg {
        std::string flux = "scharfetter_gummel"; // scharfetter_gummel | central_upwind
        std::string dt_policy = "auto";          // auto | fixed
        double dt = 0.0;
        double safety = 0.9;
        double t_end = 1.0;
        double sample_interval = 0.1;
        double stop_tol = 0.0; // L1 distance to steady state; 0 disables
        bool operator==(const SteppingCfg&) const = default;
    };

    struct SteadyCfg {
        double theta = 0.5;
        double tol = 1e-10;
        int max_iter = 500;
        double alpha = 0.0; // used by steady-only mode and equilibrium seeding
        bool operator==(const SteadyCfg&) const = default;
    };

    struct OutputCfg {
        std::string csv_path;
        std::string checkpoint_path;
        int checkpoint_every = 0; // every k-th sample; 0 = final state only
        bool operator==(const OutputCfg&) const = default;
    };

    GridCfg grid;
    PotentialCfg v_n, v_p;
    DopingCfg doping;
    RecombinationCfg recombination;
    double epsilon = 1.0;
    InitialCfg initial;
    SteppingCfg stepping;
    SteadyCfg steady;
    OutputCfg outputs;

    bool operator==(const SimConfig&) const = default;
};

/// Parses the strict JSON document. Syntax errors carry line/column; unknown
/// keys and out-of-range values name the offending dotted key.
SimConfig parse_config(const std::string& text);

/// Serializes so that parse_config(serialize_config(cfg)) == cfg.
std::string serialize_config(const SimConfig& cfg);

/// Assembles grid, potentials, doping field and recombination model.
Grid build_grid(const SimConfig& cfg);
ModelData build_model(const SimConfig& cfg);
StepScheme build_scheme(const SimConfig& cfg);

} // namespace ddp

#endif
