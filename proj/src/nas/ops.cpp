#include "cdcnet/nas/ops.hpp"

#include <charconv>
#include <cmath>
#include <set>

namespace cdcnet {

namespace {

std::string format_ratio(double r) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, r);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string OpSpec::name() const {
  switch (kind) {
    case OpKind::none: return "none";
    case OpKind::skip_connect: return "skip_connect";
    case OpKind::cdc_single: return "cdc_single";
    case OpKind::cdc_stack: return "cdc_2_" + format_ratio(ratio);
  }
  return "?";
}

OpSpec OpSpec::parse(const std::string& name) {
  if (name == "none") return {OpKind::none};
  if (name == "skip_connect") return {OpKind::skip_connect};
  if (name == "cdc_single") return {OpKind::cdc_single};
  const std::string prefix = "cdc_2_";
  if (name.rfind(prefix, 0) == 0) {
    const char* b = name.data() + prefix.size();
    const char* e = name.data() + name.size();
    double r = 0;
    auto res = std::from_chars(b, e, r);
    if (res.ec == std::errc() && res.ptr == e && r > 0 && std::isfinite(r) && format_ratio(r) == std::string(b, e)) {
      return {OpKind::cdc_stack, r};
    }
  }
  throw ConfigError("unknown operation '" + name + "'");
}

OpCatalog default_catalog() {
  OpCatalog c{{OpKind::none}, {OpKind::skip_connect}, {OpKind::cdc_single}};
  for (double r : {0.5, 1.0, 2.0, 4.0, 8.0}) c.push_back({OpKind::cdc_stack, r});
  return c;
}

void validate_catalog(const OpCatalog& catalog, bool standard) {
  if (standard && catalog.size() != 8) {
    throw ConfigError("operation catalog must hold exactly 8 entries, got " + std::to_string(catalog.size()));
  }
  if (catalog.empty()) throw ConfigError("operation catalog is empty");
  std::set<std::string> names;
  bool has_none = false, has_skip = false;
  for (const OpSpec& op : catalog) {
    const std::string n = op.name();
    OpSpec::parse(n);
    if (!names.insert(n).second) throw ConfigError("operation catalog lists '" + n + "' twice");
    if (!(op.theta >= 0.0 && op.theta <= 1.0)) throw ConfigError("operation '" + n + "': theta outside [0,1]");
    has_none |= op.kind == OpKind::none;
    has_skip |= op.kind == OpKind::skip_connect;
  }
  if (!(has_none && has_skip)) throw ConfigError("operation catalog must contain none and skip_connect");
}

std::size_t catalog_index(const OpCatalog& catalog, const std::string& name) {
  for (std::size_t i = 0; i < catalog.size(); ++i)
    if (catalog[i].name() == name) return i;
  throw ConfigError("operation '" + name + "' is not in the catalog");
}

template <class T>
CandidateOp<T>::CandidateOp(const std::string& name, const OpSpec& spec, std::size_t channels) : spec_(spec) {
  const ThetaMode mode = FixedTheta{spec.theta};
  if (spec.kind == OpKind::cdc_single) {
    units_.push_back(std::make_unique<CdcUnit<T>>(name + ".0", channels, channels, mode));
  } else if (spec.kind == OpKind::cdc_stack) {
    const std::size_t hidden = std::max<long>(1, std::lround(spec.ratio * static_cast<double>(channels)));
    units_.push_back(std::make_unique<CdcUnit<T>>(name + ".0", channels, hidden, mode));
    units_.push_back(std::make_unique<CdcUnit<T>>(name + ".1", hidden, channels, mode));
  }
}

template <class T>
std::optional<Var<T>> CandidateOp<T>::forward(Tape<T>& tape, Var<T> x, Mode mode) {
  if (spec_.kind == OpKind::none) return std::nullopt;
  for (auto& u : units_) x = u->forward(tape, x, mode);
  return x;
}

template <class T>
void CandidateOp<T>::init(Rng& rng) {
  for (auto& u : units_) u->init(rng);
}

template <class T>
void CandidateOp<T>::collect(StateDict<T>& out) {
  for (auto& u : units_) u->collect(out);
}

template class CandidateOp<float>;
template class CandidateOp<double>;

}  // namespace cdcnet
