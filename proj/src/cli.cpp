#include "phylopt/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <sstream>

#include "phylopt/config.hpp"
#include "phylopt/digest.hpp"
#include "phylopt/process.hpp"
#include "phylopt/report.hpp"

#ifndef PHYLOPT_VERSION
#define PHYLOPT_VERSION "0.0.0"
#endif

namespace phylopt {
namespace {

using nlohmann::json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot write " + tmp);
    f << text;
    if (!f.flush()) throw InputError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct Prepared {
  RunConfig config;
  std::filesystem::path base_dir;
  std::filesystem::path journal;
  std::filesystem::path workdir_override;
};

Prepared prepare(const RunOptions& o) {
  Prepared p;
  p.config = parse_config(o.config);
  p.base_dir = o.config.parent_path();
  auto& pc = p.config.pipeline;
  if (o.seed) pc.seed = pc.ga.seed = *o.seed;
  if (o.workers) pc.workers = *o.workers;
  if (o.gamma) pc.gamma = *o.gamma;
  if (o.target) pc.target = *o.target;
  if (o.elevate) pc.target = pc.elevated_target;
  pc.ga.target = pc.target;
  try {
    pc.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  p.journal = o.journal ? *o.journal : resolve_path(p.base_dir, p.config.journal);
  if (const char* env = std::getenv("PHYLOPT_WORKDIR"); env && *env) p.workdir_override = env;
  return p;
}

std::string program_of(const std::string& command) {
  const auto argv = split_command(command);
  return argv.empty() ? std::string() : argv.front();
}

RunManifest start_manifest(const Prepared& p, const std::filesystem::path& config_file) {
  RunManifest m;
  m.config = serialize_config(p.config);
  m.input_digests[config_file.string()] = sha256_file_hex(config_file);
  for (const auto& f : input_files(p.config, p.base_dir)) m.input_digests[f.string()] = sha256_file_hex(f);
  m.tools["phylopt"] = PHYLOPT_VERSION;
  if (p.config.backend == Backend::synthetic) {
    m.tools["backend"] = "synthetic";
  } else {
    m.tools["backend"] = "external";
    if (!p.config.external.align_command.empty()) m.tools["aligner"] = p.config.external.align_command;
    m.tools["inference"] = p.config.external.infer_command;
    m.tools["inference_program"] = program_of(p.config.external.infer_command);
  }
  m.pipeline_seed = p.config.pipeline.seed;
  m.tool_seed = p.config.tool_seed;
  m.started = utc_now();
  m.outcome = "running";
  return m;
}

std::string describe(const ScoredTree& t) {
  std::ostringstream o;
  o << t.word.to_string() << " b=" << t.score.lowest_bootstrap << " p=" << t.score.gene_rate
    << " s=" << t.score.fitness;
  return o.str();
}

}  // namespace

std::string RunManifest::to_json() const {
  json j;
  j["config"] = config;
  j["input_digests"] = input_digests;
  j["tools"] = tools;
  j["seeds"] = {{"pipeline", pipeline_seed}, {"tool", tool_seed}};
  j["started"] = started;
  j["finished"] = finished;
  j["stage_code"] = stage_code ? json(*stage_code) : json(nullptr);
  j["outcome"] = outcome;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    const auto j = json::parse(text);
    RunManifest m;
    m.config = j.at("config").get<std::string>();
    m.input_digests = j.at("input_digests").get<std::map<std::string, std::string>>();
    m.tools = j.at("tools").get<std::map<std::string, std::string>>();
    m.pipeline_seed = j.at("seeds").at("pipeline").get<std::uint64_t>();
    m.tool_seed = j.at("seeds").at("tool").get<std::uint64_t>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    if (!j.at("stage_code").is_null()) m.stage_code = j.at("stage_code").get<int>();
    m.outcome = j.at("outcome").get<std::string>();
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed run manifest: ") + e.what());
  }
}

std::filesystem::path manifest_path(const std::filesystem::path& journal) {
  return journal.string() + ".manifest.json";
}

std::vector<std::string> stale_inputs(const RunManifest& manifest) {
  std::vector<std::string> stale;
  for (const auto& [path, digest] : manifest.input_digests) {
    try {
      if (sha256_file_hex(path) != digest) stale.push_back(path);
    } catch (const Error&) {
      stale.push_back(path);
    }
  }
  return stale;
}

int cmd_validate(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const auto p = prepare(options);
    make_evaluator(p.config, p.base_dir, p.workdir_override);
    out << "config ok: " << p.config.pipeline.gene_labels.size() << " genes, "
        << (p.config.backend == Backend::synthetic ? "synthetic" : "external") << " backend\n";
    if (std::filesystem::exists(p.journal)) {
      const auto journal = Journal::load(p.journal);
      out << "journal ok: " << journal.size() << " records (" << journal.ok_count() << " ok)\n";
    }
    return kExitWinner;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
  std::optional<RunManifest> manifest;
  std::filesystem::path mpath;
  try {
    const auto p = prepare(options);
    auto evaluator = make_evaluator(p.config, p.base_dir, p.workdir_override);
    const bool exists = std::filesystem::exists(p.journal);
    if (exists && !options.resume) {
      err << "error: journal " << p.journal.string() << " already exists; pass --resume to continue it\n";
      return kExitError;
    }
    mpath = manifest_path(p.journal);
    Journal journal;
    if (exists) {
      journal = Journal::load(p.journal);
      if (std::filesystem::exists(mpath)) {
        const auto previous = RunManifest::from_json(read_text(mpath));
        if (const auto stale = stale_inputs(previous); !stale.empty()) {
          err << "error: inputs changed since the journal was started:";
          for (const auto& s : stale) err << ' ' << s;
          err << '\n';
          return kExitError;
        }
      }
    }
    if (options.dry_run) {
      out << "dry run: " << p.config.pipeline.gene_labels.size() << " genes, target "
          << p.config.pipeline.target << ", " << journal.size() << " journaled records, nothing evaluated\n";
      return kExitWinner;
    }

    manifest = start_manifest(p, options.config);
    write_text(mpath, manifest->to_json());
    journal.attach(p.journal);

    Pipeline pipeline(p.config.pipeline, *evaluator, journal);
    pipeline.set_log(&err);
    const auto report = pipeline.run();

    const auto code = static_cast<int>(report.terminating_stage());
    manifest->finished = utc_now();
    manifest->stage_code = code;
    manifest->outcome = report.found() ? "winner" : "exhausted";
    write_text(mpath, manifest->to_json());

    const auto& records = pipeline.history();
    std::string text = format_topology_table(records, p.config.pipeline.gamma, options.machine_readable);
    text += "\n" + format_stage_counts(records, options.machine_readable);
    write_text(p.journal.string() + ".report.txt", text);
    if (const auto& tree = report.found() ? report.winner : report.best)
      write_text(p.journal.string() + ".best.nwk", serialize_newick(tree->tree) + "\n");

    if (options.machine_readable) {
      out << "outcome\t" << manifest->outcome << "\nstage\t" << code << "\nstep\t" << step_name(report.last_step)
          << "\nword\t" << (report.best ? report.best->word.to_string() : "-") << "\nbackend_calls\t"
          << pipeline.backend_calls() << '\n';
    } else {
      out << text << '\n';
      if (report.found())
        out << "winner at stage " << code << " (" << step_name(report.last_step) << "): " << describe(*report.winner)
            << '\n';
      else
        out << "budget exhausted without reaching b >= " << p.config.pipeline.target
            << "; best: " << (report.best ? describe(*report.best) : "-") << '\n';
    }
    return report.found() ? kExitWinner : kExitExhausted;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (manifest) {
      manifest->finished = utc_now();
      manifest->outcome = "error";
      try {
        write_text(mpath, manifest->to_json());
      } catch (const std::exception&) {
      }
    }
    return kExitError;
  }
}

int cmd_report(const std::filesystem::path& journal_path, double gamma, bool machine_readable, std::ostream& out,
               std::ostream& err) {
  try {
    const auto journal = Journal::load(journal_path);
    if (journal.ok_count() == 0) {
      err << "no evaluations in " << journal_path.string() << '\n';
      return kExitError;
    }
    out << format_topology_table(journal.records(), gamma, machine_readable) << '\n'
        << format_stage_counts(journal.records(), machine_readable);
    return kExitWinner;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gene subset search for well-supported phylogenies"};
  app.require_subcommand(1);
  RunOptions o;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  double gamma = 8.0;
  int target = 0;
  std::string journal;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", o.config, "INI configuration file")->required();
    cmd->add_option("--seed", seed, "pipeline RNG seed");
    cmd->add_option("--workers", workers, "evaluation worker count")->check(CLI::PositiveNumber);
    cmd->add_option("--gamma", gamma, "topology frequency threshold in percent")->check(CLI::Range(1.0, 10.0));
    cmd->add_option("--target", target, "target lowest bootstrap")->check(CLI::Range(0, 100));
    cmd->add_option("--journal", journal, "journal path (overrides the config)");
  };
  auto* run = app.add_subcommand("run", "run the search pipeline");
  add_common(run);
  run->add_flag("--resume", o.resume, "continue an existing journal");
  run->add_flag("--dry-run", o.dry_run, "validate inputs without evaluating");
  run->add_flag("--elevate", o.elevate, "use the elevated target from the config");
  run->add_flag("--machine-readable", o.machine_readable, "tab-separated output");

  auto* validate = app.add_subcommand("validate", "check a configuration and its inputs");
  add_common(validate);

  auto* report = app.add_subcommand("report", "summarise a journal");
  report->add_option("--journal", journal, "journal file")->required();
  report->add_option("--gamma", gamma, "topology frequency threshold in percent")->check(CLI::Range(1.0, 10.0));
  report->add_flag("--machine-readable", o.machine_readable, "tab-separated output");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitWinner : kExitError;
  }

  auto finish_options = [&](CLI::App* cmd) {
    if (cmd->count("--seed")) o.seed = seed;
    if (cmd->count("--workers")) o.workers = workers;
    if (cmd->count("--gamma")) o.gamma = gamma;
    if (cmd->count("--target")) o.target = target;
    if (cmd->count("--journal")) o.journal = journal;
  };
  if (*run) {
    finish_options(run);
    return cmd_run(o, out, err);
  }
  if (*validate) {
    finish_options(validate);
    return cmd_validate(o, out, err);
  }
  return cmd_report(journal, gamma, o.machine_readable, out, err);
}

}  // namespace phylopt
