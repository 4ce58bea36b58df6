#include "finitopo/config.hpp"
#include "finitopo/error.hpp"
#include "finitopo/report.hpp"
#include "finitopo/surfaces.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace finitopo;

namespace {

int analyze(const std::string& manifest, const std::string& mode, const std::string& out, const long seed, bool quiet,
            bool timings) {
    AnalysisConfig config = load_manifest(manifest);
    if (!mode.empty()) config.mode = parse_mode(mode);
    if (!out.empty()) config.output_dir = out;
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    const Report report = run_analysis(config, timings);
    emit(report, config.output_dir);
    if (!quiet) std::cout << summary_text(report) << "\nwrote " << config.output_dir << "/report.json\n";
    return report.has_errors() ? 1 : 0;
}

int list_surfaces() {
    for (const auto& g : gallery()) {
        std::cout << g.name << "  " << g.summary;
        if (!g.params.empty()) {
            std::cout << "  [";
            for (std::size_t k = 0; k < g.params.size(); ++k) std::cout << (k ? ", " : "") << g.params[k];
            std::cout << "]";
        }
        std::cout << "\n";
    }
    return 0;
}

int flow(const std::string& manifest, std::size_t seed_index, const std::string& out) {
    const AnalysisConfig config = load_manifest(manifest);
    const ImmersionDef imm = builtin_surface(config.surface);
    const SurfaceSamples samples = sample_surface(imm, config.base_point, config.grid, config.tolerances);
    const AEstimate a = a_sequence(imm, samples, config.exhaustion.radii(), config.tail, config.tolerances);
    const int i = first_bounded_tail(a.a);
    if (a.verdict.kind == Verdict::Diverging || i < 0) {
        std::cerr << "not applicable: the a_i have no tail below 1\n";
        return 0;
    }
    double c = 0.0;
    for (std::size_t j = static_cast<std::size_t>(i); j < a.a.size(); ++j) c = std::max(c, a.a[j]);
    const Vec phi_p = evaluate_jet(imm, config.base_point, config.tolerances).value;
    const Vec center = config.center ? *config.center : phi_p;
    const double r = a.radii[static_cast<std::size_t>(i)] + (phi_p - center).norm();
    const FlowTrace tr = single_trace(imm, config.base_point, center, r, seed_index, config.flow, config.tolerances);

    if (out.empty()) {
        write_trace_csv(tr, c, std::cout);
    } else {
        std::ofstream os(out);
        write_trace_csv(tr, c, os);
        if (!os) throw GeometryError(ErrorCode::IoError, "cannot write '" + out + "'");
    }
    const AngleBoundResult ab = check_angle_bound(tr, c);
    std::fprintf(stderr,
                 "seed %zu: %s at t = %.6g, %zu states\n"
                 "  R affine %.3g, identity %.3g, conservation %.3g, accumulator %.3g\n"
                 "  angle bound %s (margin %.3g), premise %s (margin %.3g)\n",
                 seed_index, std::string(to_string(tr.termination)).c_str(),
                 tr.states.empty() ? 0.0 : tr.states.back().t, tr.states.size(), check_R_affine(tr),
                 check_integrated_identity(tr), conservation_rms(tr), accumulator_consistency(tr),
                 ab.violations == 0 ? "holds" : "violated", ab.worst_margin, ab.premise_passed ? "holds" : "violated",
                 ab.premise_margin);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Curvature decay, properness and finite-topology certificates for immersed submanifolds"};
    app.require_subcommand(1);

    std::string manifest, mode, out;
    long seed = -1;
    bool quiet = false, timings = false;
    auto* an = app.add_subcommand("analyze", "Run the analysis pipeline on a manifest");
    an->add_option("manifest", manifest, "YAML manifest")->required()->check(CLI::ExistingFile);
    an->add_option("--mode", mode, "a-invariant | b-invariant | properness | topology | full");
    an->add_option("--out", out, "Output directory (overrides the manifest)");
    an->add_option("--seed", seed, "Seed for the random spot checks")->check(CLI::NonNegativeNumber);
    an->add_flag("--quiet", quiet, "Do not print the summary");
    an->add_flag("--timings", timings, "Record wall-clock timings in the report");

    auto* surf = app.add_subcommand("surfaces", "Surface gallery");
    surf->require_subcommand(1);
    surf->add_subcommand("list", "List the built-in surfaces");

    std::string flow_manifest, flow_out;
    std::size_t seed_index = 0;
    auto* fl = app.add_subcommand("flow", "Integrate a single radial flow line (CSV on stdout)");
    fl->add_option("manifest", flow_manifest, "YAML manifest")->required()->check(CLI::ExistingFile);
    fl->add_option("--seed-index", seed_index, "Index of the level-set seed")->required();
    fl->add_option("--out", flow_out, "Write the CSV here instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (an->parsed()) return analyze(manifest, mode, out, seed, quiet, timings);
        if (surf->parsed()) return list_surfaces();
        if (fl->parsed()) return flow(flow_manifest, seed_index, flow_out);
    } catch (const GeometryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
