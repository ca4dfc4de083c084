#include "pfv/spec_json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "pfv/json_io.hpp"
#include "pfv/types.hpp"

namespace pfv {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
      throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

const json& member(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError("missing key '" + std::string(key) + "' in " + where);
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where + " must be a number");
  return j.get<double>();
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where + " must be an integer");
  return j.get<int>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + " must be a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + " must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) out.push_back(number(x, where));
  return out;
}

// Scalars are broadcast over every axis.
template <class T, class F>
std::vector<T> per_axis(const json& j, int dims, const std::string& where, F convert) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& x : j) out.push_back(convert(x, where));
  } else {
    out.assign(static_cast<std::size_t>(std::max(dims, 0)), convert(j, where));
  }
  return out;
}

Exchange parse_exchange(const std::string& s) {
  if (s == "none") return Exchange::none;
  if (s == "symmetric") return Exchange::symmetric;
  if (s == "antisymmetric") return Exchange::antisymmetric;
  throw ConfigError("exchange must be one of none, symmetric, antisymmetric");
}

const char* exchange_name(Exchange e) {
  switch (e) {
    case Exchange::symmetric:
      return "symmetric";
    case Exchange::antisymmetric:
      return "antisymmetric";
    default:
      return "none";
  }
}

PotentialSpec parse_potential(const json& j, int dims) {
  const std::string where = "potential";
  if (!j.is_object()) throw ConfigError("potential must be an object");
  const std::string kind = text(member(j, "kind", where), "potential.kind");
  if (kind == "harmonic") {
    check_keys(j, {"kind", "k"}, where);
    return potential::Harmonic{number(member(j, "k", where), "potential.k")};
  }
  if (kind == "softcoulomb_well") {
    check_keys(j, {"kind", "charge", "softening"}, where);
    return potential::SoftCoulombWell{number(member(j, "charge", where), "potential.charge"),
                                      number(member(j, "softening", where), "potential.softening")};
  }
  if (kind == "polynomial") {
    check_keys(j, {"kind", "coefficients"}, where);
    return potential::Polynomial{numbers(member(j, "coefficients", where), "potential.coefficients")};
  }
  if (kind == "tabulated") {
    check_keys(j, {"kind", "values", "gradient"}, where);
    potential::Tabulated t;
    t.values = numbers(member(j, "values", where), "potential.values");
    const json& g = member(j, "gradient", where);
    if (!g.is_array()) throw ConfigError("potential.gradient must be an array");
    if (dims == 1 && !g.empty() && g.front().is_number()) {
      t.gradient.push_back(numbers(g, "potential.gradient"));
    } else {
      for (const auto& axis : g) t.gradient.push_back(numbers(axis, "potential.gradient"));
    }
    return t;
  }
  throw ConfigError("unknown potential kind '" + kind + "'");
}

json potential_json(const PotentialSpec& v) {
  return std::visit(
      overloaded{
          [](const potential::Harmonic& p) { return json{{"kind", "harmonic"}, {"k", p.k}}; },
          [](const potential::SoftCoulombWell& p) {
            return json{{"kind", "softcoulomb_well"}, {"charge", p.charge}, {"softening", p.softening}};
          },
          [](const potential::Polynomial& p) {
            return json{{"kind", "polynomial"}, {"coefficients", p.coefficients}};
          },
          [](const potential::Tabulated& p) {
            return json{{"kind", "tabulated"}, {"values", p.values}, {"gradient", p.gradient}};
          },
      },
      v);
}

InteractionSpec parse_interaction(const json& j) {
  const std::string where = "interaction";
  if (!j.is_object()) throw ConfigError("interaction must be an object");
  const std::string kind = text(member(j, "kind", where), "interaction.kind");
  if (kind == "none") {
    check_keys(j, {"kind"}, where);
    return interaction::None{};
  }
  if (kind == "coulomb3d") {
    check_keys(j, {"kind"}, where);
    return interaction::Coulomb3d{};
  }
  if (kind == "softcoulomb") {
    check_keys(j, {"kind", "softening"}, where);
    return interaction::SoftCoulomb{number(member(j, "softening", where), "interaction.softening")};
  }
  if (kind == "tabulated") {
    check_keys(j, {"kind", "r", "w", "dw"}, where);
    return interaction::Tabulated{numbers(member(j, "r", where), "interaction.r"),
                                  numbers(member(j, "w", where), "interaction.w"),
                                  numbers(member(j, "dw", where), "interaction.dw")};
  }
  throw ConfigError("unknown interaction kind '" + kind + "'");
}

json interaction_json(const InteractionSpec& w) {
  return std::visit(
      overloaded{
          [](const interaction::None&) { return json{{"kind", "none"}}; },
          [](const interaction::Coulomb3d&) { return json{{"kind", "coulomb3d"}}; },
          [](const interaction::SoftCoulomb& s) {
            return json{{"kind", "softcoulomb"}, {"softening", s.softening}};
          },
          [](const interaction::Tabulated& t) {
            return json{{"kind", "tabulated"}, {"r", t.distance}, {"w", t.value}, {"dw", t.derivative}};
          },
      },
      w);
}

}  // namespace

SystemSpec system_spec_from_json(const json& j) {
  check_keys(j, {"electrons", "grid", "potential", "interaction", "modes", "field_treatment"},
             "system spec");
  SystemSpec spec;

  const json& e = member(j, "electrons", "system spec");
  check_keys(e, {"count", "dims", "exchange"}, "electrons");
  spec.electrons.count = integer(member(e, "count", "electrons"), "electrons.count");
  spec.electrons.dims = integer(member(e, "dims", "electrons"), "electrons.dims");
  spec.electrons.exchange = parse_exchange(text(member(e, "exchange", "electrons"), "electrons.exchange"));
  const int d = spec.electrons.dims;

  const json& g = member(j, "grid", "system spec");
  check_keys(g, {"min", "max", "points"}, "grid");
  spec.grid.lower = per_axis<double>(member(g, "min", "grid"), d, "grid.min", number);
  spec.grid.upper = per_axis<double>(member(g, "max", "grid"), d, "grid.max", number);
  spec.grid.points = per_axis<int>(member(g, "points", "grid"), d, "grid.points", integer);

  spec.potential = parse_potential(member(j, "potential", "system spec"), d);
  spec.interaction = parse_interaction(member(j, "interaction", "system spec"));

  const json& modes = member(j, "modes", "system spec");
  if (!modes.is_array()) throw ConfigError("modes must be an array");
  for (const auto& m : modes) {
    check_keys(m, {"omega", "lambda", "drive", "n_max"}, "mode");
    ModeSpec mode;
    mode.omega = number(member(m, "omega", "mode"), "mode.omega");
    mode.lambda = per_axis<double>(member(m, "lambda", "mode"), d, "mode.lambda", number);
    if (m.contains("drive")) mode.drive = number(m["drive"], "mode.drive");
    mode.n_max = integer(member(m, "n_max", "mode"), "mode.n_max");
    spec.modes.push_back(std::move(mode));
  }

  const std::string ft = text(member(j, "field_treatment", "system spec"), "field_treatment");
  if (ft == "quantum") {
    spec.field_treatment = FieldTreatment::quantum;
  } else if (ft == "classical") {
    spec.field_treatment = FieldTreatment::classical;
  } else {
    throw ConfigError("field_treatment must be quantum or classical");
  }
  return spec;
}

json to_json(const SystemSpec& spec) {
  json modes = json::array();
  for (const auto& m : spec.modes)
    modes.push_back({{"omega", m.omega}, {"lambda", m.lambda}, {"drive", m.drive}, {"n_max", m.n_max}});
  return json{
      {"electrons",
       {{"count", spec.electrons.count},
        {"dims", spec.electrons.dims},
        {"exchange", exchange_name(spec.electrons.exchange)}}},
      {"grid", {{"min", spec.grid.lower}, {"max", spec.grid.upper}, {"points", spec.grid.points}}},
      {"potential", potential_json(spec.potential)},
      {"interaction", interaction_json(spec.interaction)},
      {"modes", modes},
      {"field_treatment", spec.field_treatment == FieldTreatment::quantum ? "quantum" : "classical"},
  };
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

SystemSpec load_system_spec(const std::filesystem::path& path) {
  return system_spec_from_json(read_json_file(path));
}

FreeSpaceModeSetSpec freespace_spec_from_json(const json& j) {
  check_keys(j, {"box_length", "cutoff", "c"}, "free-space mode set");
  FreeSpaceModeSetSpec spec;
  spec.box_length = number(member(j, "box_length", "free-space mode set"), "box_length");
  spec.cutoff = number(member(j, "cutoff", "free-space mode set"), "cutoff");
  if (j.contains("c")) spec.speed_of_light = number(j["c"], "c");
  if (!(spec.box_length > 0.0) || !(spec.cutoff > 0.0) || !(spec.speed_of_light > 0.0))
    throw ConfigError("box_length, cutoff and c must be positive");
  return spec;
}

json to_json(const FreeSpaceModeSetSpec& spec) {
  return json{{"box_length", spec.box_length}, {"cutoff", spec.cutoff}, {"c", spec.speed_of_light}};
}

std::string canonical_json(const SystemSpec& spec) { return dump_json(to_json(spec), -1); }

std::array<std::uint8_t, 32> spec_hash(const SystemSpec& spec) {
  return sha256(canonical_json(spec));
}

std::array<std::uint8_t, 32> sha256(std::string_view bytes) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != out.size())
    throw Error("sha256 failed");
  return out;
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    s += digits[b >> 4];
    s += digits[b & 15];
  }
  return s;
}

}  // namespace pfv
