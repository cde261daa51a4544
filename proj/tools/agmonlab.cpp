#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "agmon/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"agmonlab: semiclassical jump-process generators, Finsler distances and "
                 "weighted decay verification on desk-scale grids"};
    std::string config_path;
    std::string command = "report";
    std::string out_dir;
    bool serial = false;
    app.add_option("--config", config_path, "experiment configuration file")->required();
    app.add_option("--command", command,
                   "validate | symbol | distance | spectrum | agmon-sweep | report");
    app.add_option("--out", out_dir, "output directory (overrides [output] dir)");
    app.add_flag("--serial", serial, "deterministic single-threaded execution");
    CLI11_PARSE(app, argc, argv);

    try {
        const agmon::ExperimentConfig cfg = agmon::parse_config(config_path);
        const std::string dir = out_dir.empty() ? cfg.out_dir : out_dir;
        return agmon::run_command(cfg, command, dir, serial);
    } catch (const agmon::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const agmon::hypothesis_error& e) {
        std::cerr << "hypothesis violation: " << e.what() << "\n";
        return 2;
    } catch (const agmon::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
