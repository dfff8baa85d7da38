#include "ricci/io.hpp"

#include <bit>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "ricci/diagnostics.hpp"

namespace ricci {

static_assert(std::endian::native == std::endian::little,
              "binary field records are written in host order, which must be little endian");

namespace {

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
bool get(std::istream& is, T& v) {
  return static_cast<bool>(is.read(reinterpret_cast<char*>(&v), sizeof v));
}

void write_values(std::ostream& os, std::span<const double> v) {
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!os) throw std::runtime_error("binary write failed");
}

ScalarField read_record(std::istream& is, SurfacePtr surface) {
  std::int64_t tag = 0, res = 0;
  if (!get(is, tag) || !get(is, res)) throw std::runtime_error("truncated field header");
  if (tag != 0 && tag != 1) throw std::runtime_error("unknown surface tag in field header");
  const auto kind = static_cast<SurfaceKind>(tag);
  if (!surface || surface->kind() != kind || surface->resolution() != res) {
    surface = build_surface(kind, static_cast<int>(res));
  }
  std::vector<double> v(surface->num_nodes());
  if (!is.read(reinterpret_cast<char*>(v.data()),
               static_cast<std::streamsize>(v.size() * sizeof(double)))) {
    throw std::runtime_error("truncated field values");
  }
  return ScalarField(std::move(surface), std::move(v));
}

}  // namespace

void write_field_csv(std::ostream& os, const ScalarField& f) {
  os << "node,value\n";
  for (std::size_t i = 0; i < f.size(); ++i) os << i << ',' << format_g17(f[i]) << '\n';
}

ScalarField read_field_csv(std::istream& is, const SurfacePtr& surface) {
  std::string line;
  if (!std::getline(is, line) || line != "node,value") {
    throw std::runtime_error("field csv: missing 'node,value' header");
  }
  std::vector<double> v(surface->num_nodes());
  std::size_t count = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("field csv: malformed row '" + line + "'");
    const auto idx = std::stoull(line.substr(0, comma));
    if (idx >= v.size()) throw std::runtime_error("field csv: node index out of range");
    v[idx] = std::stod(line.substr(comma + 1));
    ++count;
  }
  if (count != v.size()) throw std::runtime_error("field csv: node count does not match the surface");
  return ScalarField(surface, std::move(v));
}

void write_field_binary(std::ostream& os, const ScalarField& f) {
  put<std::int64_t>(os, static_cast<std::int64_t>(f.surface().kind()));
  put<std::int64_t>(os, f.surface().resolution());
  write_values(os, f.values());
}

ScalarField read_field_binary(std::istream& is) { return read_record(is, nullptr); }

ScalarField read_field_binary(std::istream& is, const SurfacePtr& surface) {
  return read_record(is, surface);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os << 't';
  const std::size_t n = traj.surface ? traj.surface->num_nodes() : 0;
  for (std::size_t i = 0; i < n; ++i) os << ",u" << i;
  os << '\n';
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << format_g17(traj.times[k]);
    for (double x : traj.states[k].values()) os << ',' << format_g17(x);
    os << '\n';
  }
}

void write_trajectory_binary(std::ostream& os, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    put<double>(os, traj.times[k]);
    write_field_binary(os, traj.states[k]);
  }
}

Trajectory read_trajectory_binary(std::istream& is) {
  Trajectory traj;
  double t = 0.0;
  while (get(is, t)) {
    auto f = read_record(is, traj.surface);
    if (!traj.surface) traj.surface = f.surface_ptr();
    traj.times.push_back(t);
    traj.rhs_values.push_back(eval_rhs(f));
    traj.states.push_back(std::move(f));
  }
  if (traj.times.size() > 1) traj.dt = traj.times[1] - traj.times[0];
  return traj;
}

std::string run_id(const Trajectory& traj, const std::string& config_text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  if (!traj.states.empty()) {
    const auto v = traj.states.front().values();
    mix(v.data(), v.size() * sizeof(double));
  }
  mix(config_text.data(), config_text.size());
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_trajectory_metadata(std::ostream& os, const Trajectory& traj,
                               const std::map<std::string, std::string>& config) {
  std::string text;
  for (const auto& [k, v] : config) text += k + '=' + v + '\n';
  nlohmann::ordered_json j;
  j["run_id"] = run_id(traj, text);
  if (traj.surface) {
    j["surface"] = {{"kind", to_string(traj.surface->kind())},
                    {"resolution", traj.surface->resolution()},
                    {"nodes", traj.surface->num_nodes()},
                    {"kbar", traj.surface->kbar()}};
  }
  j["integrator"] = to_string(traj.integrator);
  j["dt"] = traj.dt;
  j["status"] = traj.completed() ? "completed" : "blow_up";
  j["message"] = traj.message;
  j["stored_times"] = traj.times.size();
  j["substeps"] = traj.substeps;
  j["config"] = config;
  os << j.dump(2) << '\n';
}

}  // namespace ricci
