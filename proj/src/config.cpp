#include "phylopt/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "phylopt/external.hpp"
#include "phylopt/synthetic.hpp"

namespace phylopt {
namespace {

namespace pt = boost::property_tree;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "pipeline.target",      "pipeline.elevated_target", "pipeline.random_iterations", "pipeline.gamma",
      "pipeline.workers",     "pipeline.seed",            "pipeline.journal",           "ga.population",
      "ga.crossovers",        "ga.mutations",             "ga.injections",              "ga.generations_one",
      "ga.generations_two",   "genes.list",               "genes.alignment_dir",        "evaluator.backend",
      "evaluator.seed",       "evaluator.timeout",        "evaluator.workdir",          "synthetic.noisy",
      "synthetic.base",       "synthetic.penalty",        "synthetic.flip_threshold",   "external.align_command",
      "external.infer_command"};
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    auto item = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

class Reader {
 public:
  Reader(const pt::ptree& tree, std::vector<std::string>& problems) : tree_(tree), problems_(problems) {}

  std::optional<std::string> text(const std::string& key) {
    if (auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
    return std::nullopt;
  }

  template <typename T>
  void integer(const std::string& key, T& out, T lo, T hi) {
    auto v = text(key);
    if (!v) return;
    T parsed{};
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
      problems_.push_back(key + ": '" + *v + "' is not an integer");
    } else if (parsed < lo || parsed > hi) {
      problems_.push_back(key + ": " + *v + " is outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    } else {
      out = parsed;
    }
  }

  void real(const std::string& key, double& out, double lo, double hi) {
    auto v = text(key);
    if (!v) return;
    double parsed = 0;
    const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), parsed);
    if (v->empty() || ec != std::errc() || ptr != v->data() + v->size()) {
      problems_.push_back(key + ": '" + *v + "' is not a number");
    } else if (!(parsed >= lo && parsed <= hi)) {
      problems_.push_back(key + ": " + *v + " is outside [" + format_double(lo) + ", " + format_double(hi) + "]");
    } else {
      out = parsed;
    }
  }

 private:
  const pt::ptree& tree_;
  std::vector<std::string>& problems_;
};

}  // namespace

RunConfig parse_config_text(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  std::vector<std::string> problems;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      problems.push_back("key '" + section + "' must live inside a section");
      continue;
    }
    for (const auto& [key, value] : body) {
      (void)value;
      if (!known_keys().count(section + "." + key)) problems.push_back("unknown key " + section + "." + key);
    }
  }

  RunConfig c;
  Reader r(tree, problems);
  auto& p = c.pipeline;
  r.integer("pipeline.target", p.target, 0, 100);
  r.integer("pipeline.elevated_target", p.elevated_target, 0, 100);
  r.integer<std::size_t>("pipeline.random_iterations", p.random_iterations, 0, 100000000);
  r.real("pipeline.gamma", p.gamma, 1.0, 10.0);
  r.integer<std::size_t>("pipeline.workers", p.workers, 1, 4096);
  r.integer<std::uint64_t>("pipeline.seed", p.seed, 0, UINT64_MAX);
  if (auto v = r.text("pipeline.journal")) c.journal = *v;

  r.integer<std::size_t>("ga.population", p.ga.population_size, 1, 1000000);
  r.integer<std::size_t>("ga.crossovers", p.ga.crossovers, 1, 1000000);
  r.integer<std::size_t>("ga.mutations", p.ga.mutations, 1, 1000000);
  r.integer<std::size_t>("ga.injections", p.ga.injections, 1, 1000000);
  r.integer<std::size_t>("ga.generations_one", p.ga.generations_stage_one, 0, 100000000);
  r.integer<std::size_t>("ga.generations_two", p.ga.generations_stage_two, 0, 100000000);
  p.ga.target = p.target;
  p.ga.seed = p.seed;

  if (auto v = r.text("genes.list")) {
    p.gene_labels = split_list(*v);
    const std::set<std::string> unique(p.gene_labels.begin(), p.gene_labels.end());
    if (unique.size() != p.gene_labels.size()) problems.push_back("genes.list: duplicate gene names");
    if (p.gene_labels.size() < 2) problems.push_back("genes.list: at least two genes are required");
  } else {
    problems.push_back("missing required key genes.list");
  }
  if (auto v = r.text("genes.alignment_dir")) c.external.alignment_dir = *v;

  if (auto v = r.text("evaluator.backend")) {
    if (*v == "synthetic") c.backend = Backend::synthetic;
    else if (*v == "external") c.backend = Backend::external;
    else problems.push_back("evaluator.backend: '" + *v + "' is neither synthetic nor external");
  } else {
    problems.push_back("missing required key evaluator.backend");
  }
  r.integer<std::uint64_t>("evaluator.seed", c.tool_seed, 0, UINT64_MAX);
  r.real("evaluator.timeout", c.timeout_seconds, 0.001, 1e9);
  if (auto v = r.text("evaluator.workdir")) c.workdir = *v;

  if (auto v = r.text("synthetic.noisy")) c.synthetic.noisy = split_list(*v);
  r.integer("synthetic.base", c.synthetic.base, 0, 100);
  r.integer("synthetic.penalty", c.synthetic.penalty, 0, 100);
  r.integer("synthetic.flip_threshold", c.synthetic.flip_threshold, 0, 1000000);
  for (const auto& g : c.synthetic.noisy)
    if (std::find(p.gene_labels.begin(), p.gene_labels.end(), g) == p.gene_labels.end())
      problems.push_back("synthetic.noisy: unknown gene '" + g + "'");

  if (auto v = r.text("external.align_command")) c.external.align_command = *v;
  if (auto v = r.text("external.infer_command")) c.external.infer_command = *v;
  if (c.backend == Backend::external) {
    if (c.external.infer_command.empty()) problems.push_back("external backend needs external.infer_command");
    if (c.external.alignment_dir.empty()) problems.push_back("external backend needs genes.alignment_dir");
  }

  if (!problems.empty()) {
    std::string msg = "config has " + std::to_string(problems.size()) + " problem(s):";
    for (const auto& pr : problems) msg += "\n  " + pr;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  const auto& p = c.pipeline;
  std::ostringstream o;
  o << "[pipeline]\n"
    << "target = " << p.target << '\n'
    << "elevated_target = " << p.elevated_target << '\n'
    << "random_iterations = " << p.random_iterations << '\n'
    << "gamma = " << format_double(p.gamma) << '\n'
    << "workers = " << p.workers << '\n'
    << "seed = " << p.seed << '\n'
    << "journal = " << c.journal.string() << '\n'
    << "\n[ga]\n"
    << "population = " << p.ga.population_size << '\n'
    << "crossovers = " << p.ga.crossovers << '\n'
    << "mutations = " << p.ga.mutations << '\n'
    << "injections = " << p.ga.injections << '\n'
    << "generations_one = " << p.ga.generations_stage_one << '\n'
    << "generations_two = " << p.ga.generations_stage_two << '\n'
    << "\n[genes]\n"
    << "list = " << join(p.gene_labels) << '\n';
  if (!c.external.alignment_dir.empty()) o << "alignment_dir = " << c.external.alignment_dir.string() << '\n';
  o << "\n[evaluator]\n"
    << "backend = " << (c.backend == Backend::synthetic ? "synthetic" : "external") << '\n'
    << "seed = " << c.tool_seed << '\n'
    << "timeout = " << format_double(c.timeout_seconds) << '\n'
    << "workdir = " << c.workdir.string() << '\n'
    << "\n[synthetic]\n";
  if (!c.synthetic.noisy.empty()) o << "noisy = " << join(c.synthetic.noisy) << '\n';
  o << "base = " << c.synthetic.base << '\n'
    << "penalty = " << c.synthetic.penalty << '\n'
    << "flip_threshold = " << c.synthetic.flip_threshold << '\n';
  if (!c.external.align_command.empty() || !c.external.infer_command.empty()) {
    o << "\n[external]\n";
    if (!c.external.align_command.empty()) o << "align_command = " << c.external.align_command << '\n';
    if (!c.external.infer_command.empty()) o << "infer_command = " << c.external.infer_command << '\n';
  }
  return o.str();
}

std::filesystem::path resolve_path(const std::filesystem::path& base_dir, const std::filesystem::path& p) {
  if (p.empty() || p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

std::vector<std::filesystem::path> input_files(const RunConfig& config, const std::filesystem::path& base_dir) {
  std::vector<std::filesystem::path> files;
  if (config.backend != Backend::external) return files;
  const auto dir = resolve_path(base_dir, config.external.alignment_dir);
  for (const auto& g : config.pipeline.gene_labels) files.push_back(dir / (g + ".fasta"));
  return files;
}

std::unique_ptr<Evaluator> make_evaluator(const RunConfig& config, const std::filesystem::path& base_dir,
                                          const std::filesystem::path& workdir_override) {
  const auto& labels = config.pipeline.gene_labels;
  if (config.backend == Backend::synthetic) {
    std::vector<GeneIndex> noisy;
    for (const auto& g : config.synthetic.noisy) {
      const auto it = std::find(labels.begin(), labels.end(), g);
      if (it == labels.end()) throw ConfigError("synthetic.noisy: unknown gene '" + g + "'");
      noisy.push_back({static_cast<std::size_t>(it - labels.begin())});
    }
    return std::make_unique<SyntheticEvaluator>(make_synthetic_model(labels.size(), std::move(noisy),
                                                                     config.synthetic.base, config.synthetic.penalty,
                                                                     config.synthetic.flip_threshold));
  }
  ExternalConfig ext;
  ext.genes = labels;
  ext.alignments = input_files(config, base_dir);
  ext.align_command = config.external.align_command;
  ext.infer_command = config.external.infer_command;
  ext.workdir = workdir_override.empty() ? resolve_path(base_dir, config.workdir) : workdir_override;
  ext.timeout_seconds = config.timeout_seconds;
  ext.seed = config.tool_seed;
  return std::make_unique<ExternalEvaluator>(std::move(ext));
}

}  // namespace phylopt
