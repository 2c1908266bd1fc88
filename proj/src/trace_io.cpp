// CSV + JSON sidecar serialization for harness traces.

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "agghb/error.hpp"
#include "agghb/harness.hpp"

namespace agghb::harness {
namespace {

using nlohmann::ordered_json;

constexpr const char* kHeader = "k,f,grad_norm,dist_opt,f_avg";

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

ordered_json to_json(const ProblemSpec& p) {
  return ordered_json{{"id", p.id}, {"data", p.data}, {"l2", p.l2},
                      {"lambda", p.lambda}, {"dim", p.dim}};
}

ordered_json to_json(const RunConfig& c) {
  return ordered_json{{"problem", to_json(c.problem)},
                      {"kind", to_string(c.kind)},
                      {"betas", c.optimizer.betas},
                      {"gammas", c.optimizer.gammas},
                      {"iterations", c.iterations},
                      {"stepsize_source", to_string(c.source)},
                      {"tune_scale", c.tune_scale},
                      {"x0", c.x0},
                      {"seed", c.seed},
                      {"track_average", c.track_average},
                      {"track_virtual_recursion", c.track_virtual_recursion}};
}

RunConfig run_config_from_json(const ordered_json& j) {
  RunConfig c;
  const auto& p = j.at("problem");
  c.problem.id = p.at("id").get<std::string>();
  c.problem.data = p.at("data").get<std::string>();
  c.problem.l2 = p.at("l2").get<double>();
  c.problem.lambda = p.at("lambda").get<double>();
  c.problem.dim = p.at("dim").get<std::size_t>();
  c.kind = parse_optimizer_kind(j.at("kind").get<std::string>());
  c.optimizer.betas = j.at("betas").get<std::vector<double>>();
  c.optimizer.gammas = j.at("gammas").get<std::vector<double>>();
  c.iterations = j.at("iterations").get<std::size_t>();
  c.source = parse_stepsize_source(j.at("stepsize_source").get<std::string>());
  c.tune_scale = j.at("tune_scale").get<double>();
  c.x0 = j.at("x0").get<std::vector<double>>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.track_average = j.at("track_average").get<bool>();
  c.track_virtual_recursion = j.at("track_virtual_recursion").get<bool>();
  return c;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  std::filesystem::path p = csv;
  p += ".meta.json";
  return p;
}

std::string trace_csv(const Trace& trace) {
  std::string out = kHeader;
  out += '\n';
  for (const auto& p : trace.points) {
    out += std::to_string(p.k);
    out += ',';
    out += format_number(p.f);
    out += ',';
    out += format_number(p.grad_norm);
    out += ',';
    if (p.dist_opt) out += format_number(*p.dist_opt);
    out += ',';
    if (p.f_avg) out += format_number(*p.f_avg);
    out += '\n';
  }
  return out;
}

std::string trace_metadata(const Trace& trace) {
  const auto& c = trace.constants;
  ordered_json j{
      {"config", to_json(trace.config)},
      {"resolved", {{"betas", trace.resolved.betas}, {"gammas", trace.resolved.gammas}}},
      {"theory",
       {{"A", c.A}, {"B", c.B}, {"C", c.C}, {"D", c.D}, {"E", c.E}, {"F", c.F}, {"m", c.m}}},
      {"L", trace.L},
      {"mu", trace.mu},
      {"averaging_rho", trace.averaging_rho},
      {"diverged", trace.diverged},
      {"points", trace.points.size()},
      {"wall_seconds", trace.wall_seconds}};
  if (trace.max_recursion_residual) j["max_recursion_residual"] = *trace.max_recursion_residual;
  return j.dump(2) + "\n";
}

void export_trace(const Trace& trace, const std::filesystem::path& csv) {
  write_file(csv, trace_csv(trace));
  write_file(metadata_path(csv), trace_metadata(trace));
}

Trace import_trace(const std::filesystem::path& csv) {
  Trace trace;
  ordered_json meta;
  try {
    meta = ordered_json::parse(read_file(metadata_path(csv)));
    trace.config = run_config_from_json(meta.at("config"));
    trace.resolved.betas = meta.at("resolved").at("betas").get<std::vector<double>>();
    trace.resolved.gammas = meta.at("resolved").at("gammas").get<std::vector<double>>();
    const auto& th = meta.at("theory");
    trace.constants = {th.at("A").get<double>(), th.at("C").get<double>(),
                       th.at("D").get<double>(), th.at("E").get<double>(),
                       th.at("F").get<double>(), th.at("B").get<double>(),
                       th.at("m").get<std::size_t>()};
    trace.L = meta.at("L").get<double>();
    trace.mu = meta.at("mu").get<double>();
    trace.averaging_rho = meta.at("averaging_rho").get<double>();
    trace.diverged = meta.at("diverged").get<bool>();
    trace.wall_seconds = meta.at("wall_seconds").get<double>();
    if (meta.contains("max_recursion_residual")) {
      trace.max_recursion_residual = meta.at("max_recursion_residual").get<double>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("metadata: ") + e.what(), 0,
                     metadata_path(csv).filename().string());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("metadata: ") + e.what(), 0,
                     metadata_path(csv).filename().string());
  }

  std::istringstream in(read_file(csv));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != kHeader) throw ParseError("unexpected CSV header", 1, line);
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      fields.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (fields.size() != 5) throw ParseError("expected 5 fields", line_no, line);
    TracePoint p;
    std::size_t k = 0;
    const auto [kp, kec] = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), k);
    if (kec != std::errc{} || kp != fields[0].data() + fields[0].size() || fields[0].empty()) {
      throw ParseError("malformed iteration index", line_no, std::string(fields[0]));
    }
    p.k = k;
    const auto f = parse_number(fields[1]);
    const auto g = parse_number(fields[2]);
    if (!f) throw ParseError("malformed f", line_no, std::string(fields[1]));
    if (!g) throw ParseError("malformed grad_norm", line_no, std::string(fields[2]));
    p.f = *f;
    p.grad_norm = *g;
    for (int col : {3, 4}) {
      if (fields[col].empty()) continue;
      const auto v = parse_number(fields[col]);
      if (!v) throw ParseError("malformed number", line_no, std::string(fields[col]));
      (col == 3 ? p.dist_opt : p.f_avg) = *v;
    }
    if (p.k != trace.points.size()) {
      throw ParseError("iteration indices must count up from 0", line_no, std::string(fields[0]));
    }
    trace.points.push_back(p);
  }
  if (line_no == 0) throw ParseError("empty trace file", 1);
  return trace;
}

}  // namespace agghb::harness
