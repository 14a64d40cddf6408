// Command-line front end: batch coverage/spray runs over field files,
// synthetic field generation, the overlap-filter benchmark, and the
// economic break-even tables.

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "spraysim/economics.hpp"
#include "spraysim/field.hpp"
#include "spraysim/planner.hpp"
#include "spraysim/report.hpp"
#include "spraysim/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace spraysim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitBadInvocation = 2;

struct Manifest {
    std::vector<fs::path> fields;
    fs::path config;
    fs::path output_dir = "out";
    std::vector<std::string> setups;  // empty = all six
    int generate = 0;
    std::uint64_t seed = 1;
};

Manifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open manifest: " + path.string());
    json j = json::parse(in);
    Manifest m;
    for (const auto& f : j.value("fields", json::array())) m.fields.emplace_back(f.get<std::string>());
    if (j.contains("config")) m.config = j["config"].get<std::string>();
    if (j.contains("output_dir")) m.output_dir = j["output_dir"].get<std::string>();
    for (const auto& s : j.value("setups", json::array())) m.setups.push_back(s.get<std::string>());
    m.generate = j.value("generate", 0);
    m.seed = j.value("seed", 1);
    if (m.fields.empty() && m.generate <= 0)
        throw std::runtime_error("manifest needs a non-empty 'fields' list (or 'generate')");
    return m;
}

const char* kSetupNames[6] = {"M1_1", "M1_2", "M1_48", "M2_1", "M2_2", "M2_48"};

bool setup_selected(const Manifest& m, const std::string& name) {
    if (m.setups.empty()) return true;
    for (const auto& s : m.setups)
        if (s == name) return true;
    return false;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

int cmd_run(const fs::path& manifest_path) {
    Manifest manifest;
    try {
        manifest = load_manifest(manifest_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInvocation;
    }
    if (const char* env = std::getenv("SPRAYSIM_OUTPUT_DIR")) manifest.output_dir = env;
    fs::create_directories(manifest.output_dir);

    RunConfig base;
    if (!manifest.config.empty()) base = load_config(manifest.config, base);
    {
        auto violations = validate_config(base);
        if (!violations.empty()) {
            for (const auto& v : violations) std::cerr << "config: " << v << "\n";
            return kExitBadInvocation;
        }
    }

    struct Job {
        std::string label;
        FieldSpec field;
        bool loaded = false;
        std::string error;
        FieldResult result;
    };
    std::vector<Job> jobs;
    for (const fs::path& p : manifest.fields) {
        Job job;
        job.label = p.string();
        try {
            job.field = load_field(p);
            job.loaded = true;
        } catch (const std::exception& e) {
            job.error = e.what();
        }
        jobs.push_back(std::move(job));
    }
    if (manifest.generate > 0) {
        for (FieldSpec& f : generate_fields(manifest.generate, manifest.seed)) {
            Job job;
            job.label = f.id;
            job.field = std::move(f);
            job.loaded = true;
            jobs.push_back(std::move(job));
        }
    }

    // Bounded worker pool over the fields; each worker runs the full
    // six-setup matrix for its field and writes the per-setup maps.
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    unsigned n_workers =
        std::max(1u, std::min(std::thread::hardware_concurrency(), 4u));
    auto worker = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            Job& job = jobs[i];
            if (!job.loaded) continue;
            try {
                job.result.id = job.field.id;
                job.result.area_ha = job.field.area_ha();
                RunConfig cfg = base;
                for (Method method : {Method::m1, Method::m2}) {
                    cfg.method = method;
                    LaneGrid grid = build_lane_grid(job.field, cfg);
                    PathPlan plan = method == Method::m1 ? plan_m1(grid, cfg) : plan_m2(grid, cfg);
                    write_text(manifest.output_dir /
                                   (job.field.id + "_path_" + to_string(method) + ".csv"),
                               plan_to_csv(plan));
                    for (SectionMode mode :
                         {SectionMode::one, SectionMode::two, SectionMode::multi}) {
                        cfg.section_mode = mode;
                        SprayMap map = simulate(job.field, plan, cfg);
                        MatrixRow row;
                        row.method = method;
                        row.mode = mode;
                        row.metrics = coverage_metrics(map, job.field);
                        std::string setup = std::string(to_string(method)) + "_" +
                                            (mode == SectionMode::one
                                                 ? "1"
                                                 : mode == SectionMode::two
                                                       ? "2"
                                                       : std::to_string(section_count(cfg)));
                        if (setup_selected(manifest, setup)) {
                            write_text(manifest.output_dir /
                                           (job.field.id + "_" + setup + ".svg"),
                                       render_svg(map, job.field, &plan));
                        }
                        job.result.rows.push_back(std::move(row));
                    }
                }
            } catch (const std::exception& e) {
                job.loaded = false;
                job.error = e.what();
            }
            std::lock_guard<std::mutex> lock(log_mutex);
            if (job.loaded)
                std::cout << job.field.id << ": done\n";
            else
                std::cerr << job.label << ": " << job.error << "\n";
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    std::vector<FieldResult> results;
    int failures = 0;
    for (Job& job : jobs) {
        if (job.loaded) {
            results.push_back(std::move(job.result));
        } else {
            ++failures;
            std::cerr << job.label << ": " << job.error << "\n";
        }
    }
    if (!results.empty()) {
        write_text(manifest.output_dir / "pathlengths.csv", pathlengths_csv(results));
        write_text(manifest.output_dir / "volumes.csv", volumes_csv(results));
        write_text(manifest.output_dir / "economics.csv", economics_csv(results, CostParams{}));
    }
    if (failures > 0) {
        std::cerr << failures << " field(s) failed; partial results in "
                  << manifest.output_dir.string() << "\n";
        return kExitRunFailure;
    }
    std::cout << "tables written to " << manifest.output_dir.string() << "\n";
    return kExitOk;
}

int cmd_gen_fields(int count, std::uint64_t seed, fs::path out_dir) {
    if (const char* env = std::getenv("SPRAYSIM_OUTPUT_DIR")) out_dir = env;
    fs::create_directories(out_dir);
    for (const FieldSpec& f : generate_fields(count, seed)) {
        save_field(f, out_dir / (f.id + ".json"));
        std::cout << (out_dir / (f.id + ".json")).string() << "\n";
    }
    return kExitOk;
}

int cmd_fig13(const std::vector<double>& d_g, fs::path out_dir) {
    if (const char* env = std::getenv("SPRAYSIM_OUTPUT_DIR")) out_dir = env;
    fs::create_directories(out_dir);
    auto variants = filter_benchmark(d_g);
    write_text(out_dir / "fig13_gap_overlap.csv", filter_benchmark_csv(variants));
    for (const auto& v : variants) {
        FieldSpec frame;
        frame.id = v.name;
        frame.contour = Polygon{{{-1.5, -1.5}, {6.5, -1.5}, {6.5, 3.5}, {-1.5, 3.5}}};
        frame.entry = {-1.5, -1.5};
        std::string name = v.d_g > 0 ? "fig13_grid_" + std::to_string(v.d_g).substr(0, 5)
                                     : std::string("fig13_polygon");
        write_text(out_dir / (name + ".svg"), render_svg(v.map, frame));
    }
    std::cout << filter_benchmark_csv(variants);
    return kExitOk;
}

int cmd_economics(const fs::path& params_path, const fs::path& out) {
    CostParams p;
    std::vector<double> ds_grid{18.6, 16.7, 22.5, 18.7};
    if (!params_path.empty()) {
        std::ifstream in(params_path);
        if (!in) throw std::runtime_error("cannot open params: " + params_path.string());
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            auto trim = [](std::string s) {
                auto b = s.find_first_not_of(" \t\r");
                auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key == "C_chemical") p.chemical_cost = std::stod(val);
            else if (key == "C_water") p.water_cost = std::stod(val);
            else if (key == "water_ratio") p.water_ratio = std::stod(val);
            else if (key == "dK_ASC") p.asc_premium = std::stod(val);
            else if (key == "A_total") p.total_area_ha = std::stod(val);
            else if (key == "N_runs_field") p.runs_per_year = std::stod(val);
            else if (key == "dS_per_ha") {
                ds_grid.clear();
                std::istringstream vs(val);
                std::string tok;
                while (std::getline(vs, tok, ',')) ds_grid.push_back(std::stod(tok));
            } else {
                throw std::runtime_error("unknown economics key '" + key + "'");
            }
        }
    }
    auto table = cost_table(ds_grid, {p.asc_premium, 2.0 * p.asc_premium},
                            {30.0, 100.0, 300.0, 600.0, 1000.0}, {p.chemical_cost, 10.0}, p);
    std::string csv = cost_table_csv(table);
    if (!out.empty()) {
        write_text(out, csv);
        std::cout << "written to " << out.string() << "\n";
    } else {
        std::cout << csv;
    }
    std::cout << "break-even volume at " << p.chemical_cost
              << " EUR/l: " << static_cast<long long>(std::llround(breakeven_volume(p)))
              << " l\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boom-sprayer area coverage and section-control simulator"};
    app.require_subcommand(1);

    std::string manifest_path;
    auto* run = app.add_subcommand("run", "Run the six-setup matrix over a batch of fields");
    run->add_option("manifest", manifest_path, "JSON manifest")->required();

    int gen_count = 0;
    std::uint64_t gen_seed = 1;
    std::string gen_out = "fields";
    auto* gen = app.add_subcommand("gen-fields", "Write synthetic field files");
    gen->add_option("count", gen_count, "number of fields")->required();
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--out", gen_out, "output directory");

    std::string dg_list = "0.5,0.25,0.125";
    std::string fig_out = "out";
    auto* fig = app.add_subcommand(
        "fig13", "Compare occupancy-grid thresholds against the sprayed-polygon filter");
    fig->add_option("--dg", dg_list, "comma-separated d_G thresholds");
    fig->add_option("--out", fig_out, "output directory");

    std::string eco_params;
    std::string eco_out;
    auto* eco = app.add_subcommand("economics", "Break-even years table");
    eco->add_option("--params", eco_params, "key-value parameter file");
    eco->add_option("--out", eco_out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitBadInvocation;
    }

    try {
        if (run->parsed()) return cmd_run(manifest_path);
        if (gen->parsed()) return cmd_gen_fields(gen_count, gen_seed, gen_out);
        if (fig->parsed()) {
            std::vector<double> dgs;
            std::istringstream ss(dg_list);
            std::string tok;
            while (std::getline(ss, tok, ',')) dgs.push_back(std::stod(tok));
            if (dgs.empty()) {
                std::cerr << "--dg needs at least one threshold\n";
                return kExitBadInvocation;
            }
            return cmd_fig13(dgs, fig_out);
        }
        if (eco->parsed()) return cmd_economics(eco_params, eco_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRunFailure;
    }
    return kExitBadInvocation;
}
