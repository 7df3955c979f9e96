#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pfrd/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Fractional reaction-diffusion splitting solver"};
    app.set_version_flag("--version", PFRD_VERSION_STRING);
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::size_t stride = 0;
    for (const auto& name : pfrd::subcommand_names()) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "run configuration file")->required();
        sub->add_option("--out", out, "output directory (overrides output.dir)");
        sub->add_option("--stride", stride, "snapshot stride (overrides output.stride)");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : pfrd::kExitConfig;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    std::optional<std::filesystem::path> out_override;
    if (!out.empty()) out_override = out;
    std::optional<std::size_t> stride_override;
    if (app.get_subcommands().front()->count("--stride") > 0) stride_override = stride;
    return pfrd::run_guarded(name, config, out_override, stride_override, std::cerr);
}
