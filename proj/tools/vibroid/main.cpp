#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "vibroid/akf.hpp"
#include "vibroid/harness.hpp"
#include "vibroid/matrix_market.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

void attach_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file (INI)")
        ->required()
        ->check(CLI::ExistingFile);
    cmd->add_option("--out", args.out_dir, "output directory (overrides config out_dir)");
    cmd->add_option("--seed", args.seed, "noise seed (overrides config seed)")
        ->each([&args](const std::string&) { args.seed_set = true; });
    cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

vibroid::ExperimentConfig load_with_overrides(const CommonArgs& args) {
    vibroid::ExperimentConfig cfg = vibroid::load_config(args.config_path);
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed_set) cfg.noise.seed = args.seed;
    return cfg;
}

std::ostream* log_stream(const CommonArgs& args) {
    return args.quiet ? nullptr : &std::cout;
}

void print_geers_line(const vibroid::ChannelErrors& ce) {
    std::printf("    %-12s mag % .4e  phase % .4e  comp % .4e\n", ce.name.c_str(),
                ce.errors.mag, ce.errors.phase, ce.errors.comp);
}

int cmd_run(const CommonArgs& args) {
    const auto cfg = load_with_overrides(args);
    const auto report = vibroid::run_scenario(cfg, log_stream(args));
    if (!args.quiet) {
        std::printf("alpha = %g%s\n", report.alpha_used,
                    report.alpha_degenerate ? " (degenerate L-curve)" : "");
        for (const auto& outcome : report.outcomes) {
            std::printf("  %s: wall %.6f s\n", outcome.method.c_str(), outcome.wall_seconds);
            for (const auto& ce : outcome.force_errors) print_geers_line(ce);
            for (const auto& ce : outcome.disp_errors) print_geers_line(ce);
        }
        for (const auto& notice : report.notices) {
            std::printf("notice: %s\n", notice.c_str());
        }
        std::printf("%zu artifacts in %s\n", report.artifacts.size(),
                    cfg.out_dir.string().c_str());
    }
    return 0;
}

int cmd_noise_sweep(const CommonArgs& args) {
    const auto cfg = load_with_overrides(args);
    if (cfg.sweep_taus.empty()) {
        throw std::runtime_error("noise-sweep needs [sweep] taus in the config");
    }
    const auto report = vibroid::run_noise_sweep(cfg, cfg.sweep_taus, log_stream(args));
    if (!args.quiet) {
        for (const auto& point : report.points) {
            std::printf("tau %.4g: mean comp %.6e (stderr %.2e, alpha %.3e)\n", point.tau,
                        point.mean_comp, point.stderr_comp, point.alpha_used);
        }
    }
    return 0;
}

int cmd_akf_compare(const CommonArgs& args) {
    const auto cfg = load_with_overrides(args);
    const auto report =
        vibroid::run_akf_comparison(cfg, cfg.akf_dt_divisors, log_stream(args));
    if (!args.quiet) {
        for (const auto& row : report.rows) {
            std::printf("%-9s dt %.2e  comp %.6e  wall %.4f s\n", row.method.c_str(), row.dt,
                        row.mean_comp, row.wall_seconds);
        }
        if (report.trends_checked) {
            std::printf("akf error monotone in dt: %s\n",
                        report.akf_error_monotone ? "yes" : "NO");
            std::printf("proposed at least as accurate: %s\n",
                        report.proposed_at_least_as_accurate ? "yes" : "NO");
            std::printf("proposed faster than finest akf: %s\n",
                        report.proposed_faster ? "yes" : "NO");
        }
        for (const auto& notice : report.notices) {
            std::printf("notice: %s\n", notice.c_str());
        }
    }
    return report.trends_checked && !(report.akf_error_monotone &&
                                      report.proposed_at_least_as_accurate &&
                                      report.proposed_faster)
               ? 2
               : 0;
}

int cmd_validate_model(const CommonArgs& args) {
    const auto cfg = load_with_overrides(args);
    vibroid::CoupledSystem sys;
    vibroid::SelectionConfig sel = cfg.selection;
    if (cfg.use_manifest) {
        auto loaded = vibroid::load_model(cfg.manifest);
        sys = std::move(loaded.system);
        if (sel.measurement_count() == 0 && sel.force_count() == 0) sel = loaded.selection;
    } else {
        sys = vibroid::generate_toy(cfg.toy);
    }
    sys.validate();
    sel.validate(sys.n_total());
    const auto rom = vibroid::build_rom(sys, cfg.rom, cfg.damping);
    if (!args.quiet) {
        std::printf("model: %td structural + %td fluid DOFs\n", sys.n_struct(), sys.n_fluid());
        std::printf("rom: %td generalized DOFs (%td structural + %td fluid modes)\n",
                    rom.size(), rom.n_modes_struct, rom.n_modes_fluid);
    }

    std::filesystem::create_directories(cfg.out_dir);
    vibroid::mm::write_matrix(cfg.out_dir / "rom_basis.mtx", rom.basis, "reduction basis");
    vibroid::mm::write_matrix(cfg.out_dir / "rom_mass.mtx", rom.mass, "reduced mass");
    vibroid::mm::write_matrix(cfg.out_dir / "rom_stiffness.mtx", rom.stiffness,
                          "reduced stiffness");
    vibroid::mm::write_matrix(cfg.out_dir / "rom_damping.mtx", rom.damping, "reduced damping");
    {
        std::ofstream out(cfg.out_dir / "eigenvalues.csv");
        out << "kind,mode,eigenvalue,frequency_hz\n";
        char buf[96];
        for (vibroid::Index i = 0; i < rom.struct_eigenvalues.size(); ++i) {
            std::snprintf(buf, sizeof buf, "struct,%td,%.17g,%.17g\n", i,
                          rom.struct_eigenvalues(i),
                          std::sqrt(std::max(0.0, rom.struct_eigenvalues(i))) /
                              (2.0 * 3.14159265358979323846));
            out << buf;
        }
        for (vibroid::Index i = 0; i < rom.fluid_eigenvalues.size(); ++i) {
            std::snprintf(buf, sizeof buf, "fluid,%td,%.17g,%.17g\n", i,
                          rom.fluid_eigenvalues(i),
                          std::sqrt(std::max(0.0, rom.fluid_eigenvalues(i))) /
                              (2.0 * 3.14159265358979323846));
            out << buf;
        }
    }

    // Coupled-spectrum fidelity check; the dense full-pencil eigensolve is
    // affordable only at modest sizes.
    if (sys.n_total() <= 200) {
        const auto full = vibroid::assemble_blocks(sys);
        const int k = static_cast<int>(std::min<vibroid::Index>(rom.size(), 10));
        const auto errors = vibroid::eigenvalue_error(full, rom, k);
        std::ofstream out(cfg.out_dir / "eigenvalue_errors.csv");
        out << "mode,rel_error\n";
        char buf[64];
        for (size_t i = 0; i < errors.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, errors[i]);
            out << buf;
        }
        if (!args.quiet) {
            // Only the lower part of a truncated spectrum is trustworthy; the
            // retained modes nearest the cut are expected to be off.
            const size_t third = std::max<size_t>(1, errors.size() / 3);
            std::printf("coupled eigenvalue errors: lowest third max %.3e, "
                        "all %d retained max %.3e (worst sits at the truncation edge)\n",
                        *std::max_element(errors.begin(), errors.begin() + third), k,
                        *std::max_element(errors.begin(), errors.end()));
        }
    } else if (!args.quiet) {
        std::printf("full-pencil eigenvalue check skipped (model larger than 200 DOFs)\n");
    }
    if (!args.quiet) {
        std::printf("model and rom pass all invariants; exports in %s\n",
                    cfg.out_dir.string().c_str());
    }
    return 0;
}

int cmd_l_curve(const CommonArgs& args) {
    auto cfg = load_with_overrides(args);
    if (cfg.alpha_grid.empty()) {
        throw std::runtime_error("l-curve needs [identification] alpha_grid in the config");
    }
    cfg.alpha_from_l_curve = true;
    cfg.method = vibroid::Method::proposed;
    const auto report = vibroid::run_scenario(cfg, log_stream(args));
    std::printf("selected alpha = %.6e%s\n", report.alpha_used,
                report.alpha_degenerate ? " (degenerate curve, minimum-residual fallback)"
                                        : "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"implicit inverse force identification on coupled vibroacoustic models"};
    app.require_subcommand(1);

    CommonArgs run_args, sweep_args, compare_args, validate_args, lcurve_args;
    auto* run_cmd = app.add_subcommand("run", "forward solve, pollute, identify, report");
    attach_common(run_cmd, run_args);
    auto* sweep_cmd =
        app.add_subcommand("noise-sweep", "repeat identification across noise levels");
    attach_common(sweep_cmd, sweep_args);
    auto* compare_cmd =
        app.add_subcommand("akf-compare", "proposed identifier vs Kalman baseline");
    attach_common(compare_cmd, compare_args);
    auto* validate_cmd =
        app.add_subcommand("validate-model", "check invariants and export the reduced model");
    attach_common(validate_cmd, validate_args);
    auto* lcurve_cmd =
        app.add_subcommand("l-curve", "select the regularization weight on this scenario");
    attach_common(lcurve_cmd, lcurve_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(run_args);
        if (sweep_cmd->parsed()) return cmd_noise_sweep(sweep_args);
        if (compare_cmd->parsed()) return cmd_akf_compare(compare_args);
        if (validate_cmd->parsed()) return cmd_validate_model(validate_args);
        if (lcurve_cmd->parsed()) return cmd_l_curve(lcurve_args);
    } catch (const std::exception& err) {
        std::fprintf(stderr, "error: %s\n", err.what());
        return 1;
    }
    return 0;
}
