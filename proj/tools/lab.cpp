// Command-line front end: one experiment per invocation, plus a report
// comparator. Exit codes: 0 ok, 2 config/schema error, 3 solver failure,
// 4 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dbarlab/experiment.hpp"

namespace fs = std::filesystem;
using namespace dbarlab;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw config_error(path + ": " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw io_error("write failed for " + path.string());
}

// --out beats LAB_OUTPUT_ROOT beats the config's own output_dir
fs::path resolve_output_dir(const experiment_config& cfg, const std::string& cli_out) {
  if (!cli_out.empty()) return cli_out;
  if (const char* root = std::getenv("LAB_OUTPUT_ROOT")) {
    fs::path base(root);
    fs::path sub(cfg.output_dir);
    if (cfg.output_dir.empty() || cfg.output_dir == ".") return base;
    if (sub.is_absolute()) return sub;
    return base / sub;
  }
  return cfg.output_dir.empty() ? fs::path(".") : fs::path(cfg.output_dir);
}

int run_one(const std::string& kind, const std::string& cfg_path,
            std::optional<std::uint64_t> seed, bool plots, const std::string& cli_out) {
  const json raw = load_json(cfg_path);
  if (raw.contains("kind") &&
      raw["kind"].is_string() && raw["kind"].get<std::string>() != kind)
    throw config_error("config kind \"" + raw["kind"].get<std::string>() +
                       "\" does not match subcommand \"" + kind + "\"");
  json patched = raw;
  patched["kind"] = kind;
  const experiment_config cfg = parse_experiment(patched, seed);
  const run_output out = run_experiment(cfg, plots);

  const fs::path dir = resolve_output_dir(cfg, cli_out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir.string());
  for (const auto& f : out.files) write_file(dir / f.filename, f.content);

  std::printf("%s: wrote %zu file(s) to %s\n", cfg.stem().c_str(), out.files.size(),
              dir.string().c_str());
  for (const auto& w : out.report.warnings) std::printf("warning: %s\n", w.c_str());
  // one-line human summary per kind
  const json& r = out.report.results;
  switch (cfg.kind) {
    case experiment_kind::check_weight:
      std::printf("condition %s: %s (margin %.6g)\n",
                  r["verdict"]["condition"].get<std::string>().c_str(),
                  r["verdict"]["verdict"].get<std::string>().c_str(),
                  r["verdict"]["margin"].get<double>());
      break;
    case experiment_kind::kohn_morrey: {
      std::printf("levels:");
      for (const auto& row : r["rows"])
        std::printf(" N=%d residual=%.3e", row["N"].get<int>(),
                    row["residual"].get<double>());
      std::printf("\n");
      break;
    }
    case experiment_kind::spectrum:
      std::printf("lambda_min=%.9g inf_mu=%.9g margin=%.3g within_slack=%s\n",
                  r["lower_bound"]["lambda_min"].get<double>(),
                  r["lower_bound"]["inf_mu"].get<double>(),
                  r["lower_bound"]["margin"].get<double>(),
                  r["lower_bound"]["within_slack"].get<bool>() ? "yes" : "no");
      break;
    case experiment_kind::tail:
      for (const auto& row : r["rows"])
        std::printf("R=%g max_tail=%.6g bound=%s\n", row["R"].get<double>(),
                    row["max_tail"].get<double>(), row["bound"].dump().c_str());
      break;
    case experiment_kind::probe:
      std::printf("verdict: %s (%s)\n",
                  r["diagnosis"]["verdict"].get<std::string>().c_str(),
                  r["diagnosis"]["reason"].get<std::string>().c_str());
      break;
    case experiment_kind::property_p:
      std::printf("(P) for all listed M: %s; max C = %.6g; (Ptilde) under C_max: %s\n",
                  r["certificate"]["p_all"].get<bool>() ? "yes" : "no",
                  r["certificate"]["max_c"].get<double>(),
                  r["certificate"]["p_tilde"].get<bool>() ? "yes" : "no");
      break;
  }
  return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path) {
  const json a = load_json(a_path);
  const json b = load_json(b_path);
  const auto cmp = compare_runs(a, b);
  std::fputs(cmp.table.c_str(), stdout);
  std::printf("results identical: %s\n", cmp.all_zero ? "yes" : "no");
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for weighted dbar energy forms"};
  app.require_subcommand(1);

  static const char* kinds[] = {"check-weight", "kohn-morrey", "spectrum",
                                "tail",         "probe",       "property-p"};
  std::string cfg_path, cli_out;
  std::uint64_t seed_val = 0;
  bool seed_set = false, plots = false;
  std::string chosen;

  for (const char* k : kinds) {
    auto* sub = app.add_subcommand(k, std::string("run a ") + k + " experiment");
    sub->add_option("config", cfg_path, "JSON experiment config")->required();
    sub->add_option("--seed", seed_val, "override every seed in the config")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_flag("--plots", plots, "emit SVG line plots");
    sub->add_option("--out", cli_out, "output directory (beats LAB_OUTPUT_ROOT)");
    sub->callback([&, k] { chosen = k; });
  }

  std::string cmp_a, cmp_b;
  auto* cmp = app.add_subcommand("compare", "diff two reports of the same kind");
  cmp->add_option("a", cmp_a, "first report JSON")->required();
  cmp->add_option("b", cmp_b, "second report JSON")->required();
  cmp->callback([&] { chosen = "compare"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (chosen == "compare") return run_compare(cmp_a, cmp_b);
    return run_one(chosen, cfg_path,
                   seed_set ? std::optional<std::uint64_t>(seed_val) : std::nullopt,
                   plots, cli_out);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const solver_error& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return 3;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
