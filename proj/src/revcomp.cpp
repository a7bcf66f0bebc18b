#include "selfprop/revcomp.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <sstream>

#include "selfprop/error.hpp"

namespace selfprop {

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::Not:
      return "NOT";
    case GateKind::Cnot:
      return "CNOT";
    case GateKind::Toffoli:
      return "TOFFOLI";
    case GateKind::Fredkin:
      return "FREDKIN";
    case GateKind::Swap:
      return "SWAP";
    case GateKind::Mcx:
      return "MCX";
  }
  return "?";
}

Gate::Gate(GateKind kind, std::vector<unsigned> lines, std::size_t controls, std::vector<bool> polarities)
    : kind_(kind), lines_(std::move(lines)), controls_(controls), polarities_(std::move(polarities)) {
  for (unsigned l : lines_) {
    if (l >= 64) throw InvalidInput("gate line index " + std::to_string(l) + " out of range");
  }
  std::vector<unsigned> sorted = lines_;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidInput("gate lines must be distinct");
  }
  if (polarities_.size() != controls_) throw InvalidInput("one polarity per control is required");
  for (std::size_t i = 0; i < controls_; ++i) {
    const std::uint64_t bit = std::uint64_t{1} << lines_[i];
    control_mask_ |= bit;
    if (polarities_[i]) control_value_ |= bit;
  }
  const bool swaps = kind_ == GateKind::Swap || kind_ == GateKind::Fredkin;
  if (swaps) {
    swap_mask_ = (std::uint64_t{1} << lines_[controls_]) | (std::uint64_t{1} << lines_[controls_ + 1]);
  } else {
    target_mask_ = std::uint64_t{1} << lines_[controls_];
  }
}

Gate Gate::not_gate(unsigned target) { return Gate(GateKind::Not, {target}, 0, {}); }
Gate Gate::cnot(unsigned control, unsigned target) { return Gate(GateKind::Cnot, {control, target}, 1, {true}); }
Gate Gate::toffoli(unsigned c1, unsigned c2, unsigned target) {
  return Gate(GateKind::Toffoli, {c1, c2, target}, 2, {true, true});
}
Gate Gate::fredkin(unsigned control, unsigned a, unsigned b) {
  return Gate(GateKind::Fredkin, {control, a, b}, 1, {true});
}
Gate Gate::swap(unsigned a, unsigned b) { return Gate(GateKind::Swap, {a, b}, 0, {}); }

Gate Gate::mcx(std::vector<unsigned> controls, std::vector<bool> polarities, unsigned target) {
  const std::size_t n = controls.size();
  controls.push_back(target);
  return Gate(GateKind::Mcx, std::move(controls), n, std::move(polarities));
}

unsigned Gate::max_line() const { return *std::max_element(lines_.begin(), lines_.end()); }

BitRegister apply_gate(const Gate& g, BitRegister r) {
  if (g.max_line() >= r.width) throw InvalidInput("gate line index exceeds register width");
  r.bits = g.apply(r.bits);
  return r;
}

// --- circuits ----------------------------------------------------------------

ReversibleCircuit::ReversibleCircuit(unsigned width, std::vector<Gate> gates) : width_(width) {
  if (width == 0 || width > 64) throw InvalidInput("circuit width must be in [1, 64]");
  gates_.reserve(gates.size());
  for (Gate& g : gates) append(std::move(g));
}

void ReversibleCircuit::append(Gate g) {
  if (g.max_line() >= width_) {
    throw InvalidInput("gate " + std::string(to_string(g.kind())) + " references line " +
                       std::to_string(g.max_line()) + " on a width-" + std::to_string(width_) + " circuit");
  }
  gates_.push_back(std::move(g));
}

std::vector<std::uint64_t> ReversibleCircuit::table() const {
  if (width_ > 24) throw InvalidInput("circuit too wide to tabulate");
  std::vector<std::uint64_t> out(std::size_t{1} << width_);
  for (std::uint64_t x = 0; x < out.size(); ++x) out[x] = apply(x);
  return out;
}

std::string ReversibleCircuit::to_text() const {
  std::ostringstream os;
  os << "width " << width_ << '\n';
  for (const Gate& g : gates_) {
    os << to_string(g.kind());
    for (unsigned l : g.lines()) os << ' ' << l;
    if (g.kind() == GateKind::Mcx && g.control_count() > 0) {
      os << " p=";
      for (bool p : g.polarities()) os << (p ? '1' : '0');
    }
    os << '\n';
  }
  return os.str();
}

ReversibleCircuit ReversibleCircuit::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::optional<ReversibleCircuit> circuit;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    auto fail = [&](const std::string& why) {
      return InvalidInput("circuit text line " + std::to_string(lineno) + ": " + why);
    };
    if (!circuit) {
      unsigned width = 0;
      if (kind != "width" || !(ls >> width)) throw fail("expected 'width N' header");
      circuit.emplace(width);
      continue;
    }
    std::vector<unsigned> lines;
    std::vector<bool> polarity;
    bool has_polarity = false;
    std::string tok;
    while (ls >> tok) {
      if (tok.rfind("p=", 0) == 0) {
        has_polarity = true;
        for (char c : tok.substr(2)) {
          if (c != '0' && c != '1') throw fail("polarity digits must be 0 or 1");
          polarity.push_back(c == '1');
        }
      } else {
        try {
          std::size_t used = 0;
          const unsigned long v = std::stoul(tok, &used);
          if (used != tok.size()) throw fail("bad line index '" + tok + "'");
          lines.push_back(static_cast<unsigned>(v));
        } catch (const std::logic_error&) {
          throw fail("bad line index '" + tok + "'");
        }
      }
    }
    auto arity = [&](std::size_t n) {
      if (lines.size() != n) throw fail(kind + " takes " + std::to_string(n) + " line indices");
    };
    if (kind == "NOT") {
      arity(1);
      circuit->append(Gate::not_gate(lines[0]));
    } else if (kind == "CNOT") {
      arity(2);
      circuit->append(Gate::cnot(lines[0], lines[1]));
    } else if (kind == "TOFFOLI") {
      arity(3);
      circuit->append(Gate::toffoli(lines[0], lines[1], lines[2]));
    } else if (kind == "FREDKIN") {
      arity(3);
      circuit->append(Gate::fredkin(lines[0], lines[1], lines[2]));
    } else if (kind == "SWAP") {
      arity(2);
      circuit->append(Gate::swap(lines[0], lines[1]));
    } else if (kind == "MCX") {
      if (lines.empty()) throw fail("MCX needs a target");
      const unsigned target = lines.back();
      lines.pop_back();
      if (!has_polarity) polarity.assign(lines.size(), true);
      if (polarity.size() != lines.size()) throw fail("MCX polarity count does not match control count");
      circuit->append(Gate::mcx(std::move(lines), std::move(polarity), target));
    } else {
      throw fail("unknown gate kind '" + kind + "'");
    }
  }
  if (!circuit) throw InvalidInput("circuit text is empty");
  return *circuit;
}

BitRegister apply_circuit(const ReversibleCircuit& c, BitRegister r) {
  if (r.width != c.width()) throw InvalidInput("register width does not match circuit width");
  r.bits = c.apply(r.bits);
  return r;
}

ReversibleCircuit invert_circuit(const ReversibleCircuit& c) {
  std::vector<Gate> gates(c.gates().rbegin(), c.gates().rend());
  return ReversibleCircuit(c.width(), std::move(gates));
}

bool is_bijective(std::span<const std::uint64_t> table, unsigned n) {
  if (n > 20) throw InvalidInput("is_bijective refuses tables wider than 20 bits");
  const std::size_t size = std::size_t{1} << n;
  if (table.size() != size) return false;
  std::vector<bool> seen(size, false);
  for (std::uint64_t y : table) {
    if (y >= size || seen[y]) return false;
    seen[y] = true;
  }
  return true;
}

namespace {

// Gates swapping basis states a and b, leaving every other state fixed.
void append_transposition(ReversibleCircuit& c, std::uint64_t a, std::uint64_t b, unsigned n) {
  const std::uint64_t diff = a ^ b;
  unsigned j = 0;
  while (!((diff >> j) & 1)) ++j;
  const bool bj = (b >> j) & 1;
  // Move b next to a (differing only on line j) without touching a.
  std::vector<Gate> prep;
  for (unsigned k = 0; k < n; ++k) {
    if (k != j && ((diff >> k) & 1)) prep.push_back(Gate::mcx({j}, {bj}, k));
  }
  for (const Gate& g : prep) c.append(g);
  std::vector<unsigned> controls;
  std::vector<bool> polarity;
  for (unsigned k = 0; k < n; ++k) {
    if (k == j) continue;
    controls.push_back(k);
    polarity.push_back((a >> k) & 1);
  }
  c.append(Gate::mcx(std::move(controls), std::move(polarity), j));
  for (auto it = prep.rbegin(); it != prep.rend(); ++it) c.append(*it);
}

}  // namespace

ReversibleCircuit synthesize(std::span<const std::uint64_t> perm, unsigned n) {
  if (n == 0 || n > 8) throw InvalidInput("synthesize supports 1..8 bits");
  if (!is_bijective(perm, n)) throw InvalidInput("synthesize needs a bijective table");
  // Peel transpositions off the output side: sigma <- (x sigma(x)) o sigma
  // until sigma is the identity. perm = t_1 o t_2 o ... o t_k, so the
  // circuit applies t_k first.
  std::vector<std::uint64_t> sigma(perm.begin(), perm.end());
  std::vector<std::uint64_t> where(sigma.size());
  for (std::uint64_t x = 0; x < sigma.size(); ++x) where[sigma[x]] = x;
  std::vector<std::pair<std::uint64_t, std::uint64_t>> transpositions;
  for (std::uint64_t x = 0; x < sigma.size(); ++x) {
    const std::uint64_t y = sigma[x];
    if (y == x) continue;
    transpositions.emplace_back(x, y);
    // Relabel outputs x <-> y.
    const std::uint64_t px = where[x];
    sigma[px] = y;
    where[y] = px;
    sigma[x] = x;
    where[x] = x;
  }
  ReversibleCircuit c(n);
  for (auto it = transpositions.rbegin(); it != transpositions.rend(); ++it) {
    append_transposition(c, it->first, it->second, n);
  }
  return c;
}

// --- random circuits and mutation ---------------------------------------

namespace {

std::vector<unsigned> distinct_lines(unsigned width, unsigned count, Rng& rng) {
  std::vector<unsigned> all(width);
  std::iota(all.begin(), all.end(), 0u);
  for (unsigned i = 0; i < count; ++i) {
    const auto j = i + static_cast<unsigned>(rng.below(width - i));
    std::swap(all[i], all[j]);
  }
  all.resize(count);
  return all;
}

}  // namespace

Gate random_gate(unsigned width, Rng& rng) {
  std::vector<GateKind> kinds{GateKind::Not};
  if (width >= 2) kinds.insert(kinds.end(), {GateKind::Cnot, GateKind::Swap, GateKind::Mcx});
  if (width >= 3) kinds.insert(kinds.end(), {GateKind::Toffoli, GateKind::Fredkin});
  const GateKind kind = kinds[rng.below(kinds.size())];
  switch (kind) {
    case GateKind::Not:
      return Gate::not_gate(static_cast<unsigned>(rng.below(width)));
    case GateKind::Cnot: {
      const auto l = distinct_lines(width, 2, rng);
      return Gate::cnot(l[0], l[1]);
    }
    case GateKind::Swap: {
      const auto l = distinct_lines(width, 2, rng);
      return Gate::swap(l[0], l[1]);
    }
    case GateKind::Toffoli: {
      const auto l = distinct_lines(width, 3, rng);
      return Gate::toffoli(l[0], l[1], l[2]);
    }
    case GateKind::Fredkin: {
      const auto l = distinct_lines(width, 3, rng);
      return Gate::fredkin(l[0], l[1], l[2]);
    }
    case GateKind::Mcx: {
      const auto target = static_cast<unsigned>(rng.below(width));
      std::vector<unsigned> controls;
      std::vector<bool> polarity;
      while (controls.empty()) {
        for (unsigned k = 0; k < width; ++k) {
          if (k != target && (rng.next() >> 63)) controls.push_back(k);
        }
      }
      for (std::size_t i = 0; i < controls.size(); ++i) polarity.push_back(rng.next() >> 63);
      return Gate::mcx(std::move(controls), std::move(polarity), target);
    }
  }
  return Gate::not_gate(0);
}

ReversibleCircuit random_circuit(unsigned width, std::size_t gates, Rng& rng) {
  ReversibleCircuit c(width);
  for (std::size_t i = 0; i < gates; ++i) c.append(random_gate(width, rng));
  return c;
}

ReversibleCircuit mutate(const ReversibleCircuit& c, Rng& rng, const MutationWeights& weights) {
  const double w[4] = {std::max(weights.insert, 0.0), std::max(weights.remove, 0.0),
                       std::max(weights.replace, 0.0), std::max(weights.move, 0.0)};
  const double total = w[0] + w[1] + w[2] + w[3];
  if (!(total > 0.0)) throw InvalidInput("mutation weights must have a positive sum");
  double u = rng.uniform() * total;
  int op = 0;
  while (op < 3 && u >= w[op]) u -= w[op++];

  std::vector<Gate> gates = c.gates();
  if (gates.empty()) op = 0;
  if (op == 3 && gates.size() < 2) op = 2;
  switch (op) {
    case 0: {
      const auto pos = rng.below(gates.size() + 1);
      gates.insert(gates.begin() + static_cast<std::ptrdiff_t>(pos), random_gate(c.width(), rng));
      break;
    }
    case 1:
      gates.erase(gates.begin() + static_cast<std::ptrdiff_t>(rng.below(gates.size())));
      break;
    case 2:
      gates[rng.below(gates.size())] = random_gate(c.width(), rng);
      break;
    default: {
      const auto from = rng.below(gates.size());
      Gate g = gates[from];
      gates.erase(gates.begin() + static_cast<std::ptrdiff_t>(from));
      auto to = rng.below(gates.size());
      if (to >= from) ++to;  // land somewhere else
      gates.insert(gates.begin() + static_cast<std::ptrdiff_t>(to), std::move(g));
      break;
    }
  }
  return ReversibleCircuit(c.width(), std::move(gates));
}

}  // namespace selfprop
