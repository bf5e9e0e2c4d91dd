#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "csl/config.hpp"
#include "csl/errors.hpp"
#include "csl/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Green's functions, bubble expansions and critical Sobolev "
               "quotients on balls and boxes"};
  app.require_subcommand(1);

  const char* names[] = {"greens",     "robin-map", "criticality",
                         "qv",         "trial-sweep", "lemma-validate",
                         "coercivity", "minimize",  "epsilon-sweep",
                         "blowup",     "oracle-ball"};
  std::string config_path, out_dir = ".", lemma_name;
  int threads = 0;
  std::uint64_t seed = 0;
  for (const char* name : names) {
    CLI::App* sub = app.add_subcommand(name, "");
    sub->add_option("--config", config_path, "configuration file");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--threads", threads, "worker thread count");
    sub->add_option("--seed", seed, "random seed (recorded; all algorithms "
                                    "are deterministic)");
    if (std::string(name) == "lemma-validate")
      sub->add_option("name", lemma_name, "expansion name");
  }
  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw csl::ConfigError("config file not found: " + config_path);
      std::ostringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    csl::Config probe = csl::Config::parse_text(text);
    if (command == "lemma-validate" && !lemma_name.empty()) {
      if (probe.has("lemma.name"))
        throw csl::ConfigError(
            "lemma name given both positionally and as lemma.name");
      text += "\n[lemma]\nname = " + lemma_name + "\n";
    }
    csl::Config cfg = csl::Config::parse_text(text);

    if (threads <= 0) {
      if (const char* env = std::getenv("CSL_THREADS")) {
        try {
          threads = std::stoi(env);
        } catch (const std::exception&) {
          throw csl::ConfigError("CSL_THREADS is not an integer");
        }
      }
    }
    return csl::run_command(command, cfg, out_dir, threads, seed);
  } catch (const csl::ConfigError& e) {
    std::cerr << "error,ConfigError," << e.what() << "\n";
    return 64;
  } catch (const csl::Error& e) {
    std::cerr << "error," << e.kind() << "," << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error,Unexpected," << e.what() << "\n";
    return 1;
  }
}
