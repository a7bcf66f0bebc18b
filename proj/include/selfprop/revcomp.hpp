#pragma once

// Reversible circuits over an n-bit register (n <= 64).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "selfprop/rng.hpp"

namespace selfprop {

enum class GateKind { Not, Cnot, Toffoli, Fredkin, Swap, Mcx };

std::string_view to_string(GateKind kind);

// A gate acts on lines (bit positions, line 0 = least significant bit).
// Layout of lines(): controls first, then the target (NOT/CNOT/TOFFOLI/MCX)
// or the two swapped lines (SWAP/FREDKIN). Every gate is its own inverse.
class Gate {
 public:
  static Gate not_gate(unsigned target);
  static Gate cnot(unsigned control, unsigned target);
  static Gate toffoli(unsigned c1, unsigned c2, unsigned target);
  static Gate fredkin(unsigned control, unsigned a, unsigned b);
  static Gate swap(unsigned a, unsigned b);
  // polarities[i] is the value control i must hold for the gate to fire.
  static Gate mcx(std::vector<unsigned> controls, std::vector<bool> polarities, unsigned target);

  GateKind kind() const { return kind_; }
  const std::vector<unsigned>& lines() const { return lines_; }
  std::size_t control_count() const { return controls_; }
  const std::vector<bool>& polarities() const { return polarities_; }

  // Largest line index referenced.
  unsigned max_line() const;

  std::uint64_t apply(std::uint64_t x) const {
    if ((x & control_mask_) != control_value_) return x;
    if (swap_mask_ != 0) {
      const std::uint64_t s = x & swap_mask_;
      return (s == 0 || s == swap_mask_) ? x : x ^ swap_mask_;
    }
    return x ^ target_mask_;
  }

  bool operator==(const Gate& other) const {
    return kind_ == other.kind_ && lines_ == other.lines_ && polarities_ == other.polarities_;
  }

 private:
  Gate(GateKind kind, std::vector<unsigned> lines, std::size_t controls, std::vector<bool> polarities);

  GateKind kind_;
  std::vector<unsigned> lines_;
  std::size_t controls_;
  std::vector<bool> polarities_;
  std::uint64_t control_mask_ = 0;
  std::uint64_t control_value_ = 0;
  std::uint64_t target_mask_ = 0;
  std::uint64_t swap_mask_ = 0;
};

struct BitRegister {
  std::uint64_t bits = 0;
  unsigned width = 0;
};

BitRegister apply_gate(const Gate& g, BitRegister r);

class ReversibleCircuit {
 public:
  explicit ReversibleCircuit(unsigned width = 1, std::vector<Gate> gates = {});

  unsigned width() const { return width_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }
  bool empty() const { return gates_.empty(); }

  // Throws InvalidInput if the gate references a line >= width.
  void append(Gate g);

  std::uint64_t apply(std::uint64_t x) const {
    for (const Gate& g : gates_) x = g.apply(x);
    return x;
  }

  // Output for every input; requires width <= 24.
  std::vector<std::uint64_t> table() const;

  bool operator==(const ReversibleCircuit& other) const {
    return width_ == other.width_ && gates_ == other.gates_;
  }

  // Text format: first line "width N", then one gate per line as
  // "KIND l0 l1 ..." with an optional polarity field "p=101" for MCX
  // (one digit per control).
  std::string to_text() const;
  static ReversibleCircuit from_text(const std::string& text);

 private:
  unsigned width_;
  std::vector<Gate> gates_;
};

BitRegister apply_circuit(const ReversibleCircuit& c, BitRegister r);

// Reverses the gate order; every supported gate is self-inverse.
ReversibleCircuit invert_circuit(const ReversibleCircuit& c);

// True iff `table` is a permutation of {0 .. 2^n - 1}. Refuses n > 20.
bool is_bijective(std::span<const std::uint64_t> table, unsigned n);

// Exact circuit for a permutation over n <= 8 bits, built from
// transpositions realised with MCX gates. Not gate-count optimal.
ReversibleCircuit synthesize(std::span<const std::uint64_t> perm, unsigned n);

// Uniform choice of gate kind among those that fit the width, then uniform
// lines. MCX controls are a random non-empty subset with random polarities.
Gate random_gate(unsigned width, Rng& rng);
ReversibleCircuit random_circuit(unsigned width, std::size_t gates, Rng& rng);

struct MutationWeights {
  double insert = 1.0;
  double remove = 1.0;
  double replace = 1.0;
  double move = 1.0;
};

// One random edit. Edits that need a gate fall back to insertion on an
// empty circuit; move falls back to replace when there is a single gate.
ReversibleCircuit mutate(const ReversibleCircuit& c, Rng& rng, const MutationWeights& weights = {});

}  // namespace selfprop
