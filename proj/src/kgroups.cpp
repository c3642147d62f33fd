#include "roelab/symmetry.hpp"

#include <cmath>
#include <numbers>

namespace roelab::sym {

namespace {

int mod(int a, int n) { return ((a % n) + n) % n; }

}  // namespace

std::string to_string(CartanLabel label) {
  switch (label) {
    case CartanLabel::A: return "A";
    case CartanLabel::AIII: return "AIII";
    case CartanLabel::AI: return "AI";
    case CartanLabel::BDI: return "BDI";
    case CartanLabel::D: return "D";
    case CartanLabel::DIII: return "DIII";
    case CartanLabel::AII: return "AII";
    case CartanLabel::CII: return "CII";
    case CartanLabel::C: return "C";
    case CartanLabel::CI: return "CI";
  }
  return "?";
}

CartanLabel label_from_string(const std::string& s) {
  for (CartanLabel l : kAllLabels)
    if (to_string(l) == s) return l;
  throw UsageError("unknown Cartan label '" + s + "'");
}

bool is_complex(CartanLabel label) { return label == CartanLabel::A || label == CartanLabel::AIII; }

int degree(CartanLabel label) {
  switch (label) {
    case CartanLabel::A: return 0;
    case CartanLabel::AIII: return 1;
    case CartanLabel::AI: return 0;
    case CartanLabel::BDI: return 1;
    case CartanLabel::D: return 2;
    case CartanLabel::DIII: return 3;
    case CartanLabel::AII: return 4;
    case CartanLabel::CII: return 5;
    case CartanLabel::C: return 6;
    case CartanLabel::CI: return 7;
  }
  return 0;
}

std::string KGroup::render() const {
  if (z == 0 && z2 == 0) return "0";
  std::string out;
  auto term = [&](const char* g, int n) {
    if (n == 0) return;
    if (!out.empty()) out += " + ";
    out += g;
    if (n > 1) out += "^" + std::to_string(n);
  };
  term("Z", z);
  term("Z2", z2);
  return out;
}

KGroup& KGroup::operator+=(const KGroup& o) {
  z += o.z;
  z2 += o.z2;
  return *this;
}

KGroup KGroup::times(int k) const {
  KGroup g = *this;
  g.z *= k;
  g.z2 *= k;
  return g;
}

KGroup KR(int n) {
  static constexpr int zs[8] = {1, 0, 0, 0, 1, 0, 0, 0};
  static constexpr int z2s[8] = {0, 1, 1, 0, 0, 0, 0, 0};
  int k = mod(n, 8);
  return KGroup{zs[k], z2s[k], "KR_" + std::to_string(k)};
}

KGroup Kc(int n) {
  int k = mod(n, 2);
  return KGroup{k == 0 ? 1 : 0, 0, "K_" + std::to_string(k)};
}

KGroup KQ(int n) { return KR(n + 4); }

KGroup kgroup_point(CartanLabel label, int d) {
  KGroup g = is_complex(label) ? Kc(degree(label) - d) : KR(degree(label) - d);
  g.provenance = "point: " + to_string(label) + " d=" + std::to_string(d);
  return g;
}

KGroup kgroup_rotation(CartanLabel label, int d, int k) {
  if (k < 2) throw UsageError("rotation order must be at least 2");
  const int j = degree(label) - d;
  KGroup g;
  if (is_complex(label)) {
    g = Kc(j).times(k);
  } else if (k % 2 == 1) {
    g = KR(j);
    g += Kc(j).times((k - 1) / 2);
  } else {
    g = KR(j).times(2);
    g += Kc(j).times((k - 2) / 2);
  }
  g.provenance = "rotation C" + std::to_string(k) + ": " + to_string(label) + " d=" + std::to_string(d);
  return g;
}

KGroup kgroup_reflection(const SymmetrySpec& spec, int d) {
  const CartanLabel label = classify(spec);
  int pr = 1;
  if (spec.has_C && spec.has_T) {
    if (!spec.CR_sign || !spec.TR_sign)
      throw UsageError("reflection classification needs the CR and TR signs");
    pr = *spec.CR_sign * *spec.TR_sign;
    if (spec.PR_sign && *spec.PR_sign != pr)
      throw UsageError("PR sign is inconsistent with CR and TR");
  } else if (spec.has_P) {
    if (!spec.PR_sign) throw UsageError("reflection classification needs the PR sign");
    pr = *spec.PR_sign;
  }
  KGroup g;
  std::string which;
  if (pr == 1) {
    int anti = 1;
    if (spec.has_T) {
      if (!spec.TR_sign) throw UsageError("reflection classification needs the TR sign");
      anti = *spec.TR_sign;
    } else if (spec.has_C) {
      if (!spec.CR_sign) throw UsageError("reflection classification needs the CR sign");
      anti = *spec.CR_sign;
    }
    g = anti == 1 ? kgroup_point(label, d - 1) : kgroup_point(label, d + 1);
    which = anti == 1 ? "PR=RP, TR=RT" : "PR=RP, TR=-RT";
  } else {
    int trp = 1;
    if (spec.has_T) trp = *spec.TR_sign * spec.C_sq * spec.T_sq;
    if (trp == 1) {
      g = kgroup_point(label, d).times(2);
      which = "PR=-RP, TRP=RPT";
    } else {
      g = Kc(degree(label) - d);
      which = "PR=-RP, TRP=-RPT";
    }
  }
  g.provenance = "reflection (" + which + "): " + to_string(label) + " d=" + std::to_string(d);
  return g;
}

// ---------------------------------------------------------------------------

void CharacterTable::validate(double tol) const {
  const std::size_t nc = class_sizes.size();
  if (nc == 0) throw UsageError("character table has no classes");
  if (square_class.size() != nc) throw UsageError("character table needs one square class per class");
  if (chars.size() != nc) throw UsageError("character table must be square");
  int total = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    total += class_sizes[c];
    if (square_class[c] < 0 || static_cast<std::size_t>(square_class[c]) >= nc)
      throw UsageError("square class index out of range");
  }
  if (total != order) throw UsageError("class sizes do not sum to the group order");
  for (const auto& row : chars)
    if (row.size() != nc) throw UsageError("character row has the wrong length");
  for (std::size_t a = 0; a < nc; ++a)
    for (std::size_t b = 0; b < nc; ++b) {
      std::complex<double> rows = 0, cols = 0;
      for (std::size_t c = 0; c < nc; ++c) {
        rows += static_cast<double>(class_sizes[c]) * chars[a][c] * std::conj(chars[b][c]);
        cols += chars[c][a] * std::conj(chars[c][b]);
      }
      double rexp = a == b ? order : 0.0;
      double cexp = a == b ? static_cast<double>(order) / class_sizes[a] : 0.0;
      if (std::abs(rows - rexp) > tol * order || std::abs(cols - cexp) > tol * order)
        throw UsageError("character table fails the orthogonality relations");
    }
}

CharacterTable cyclic_character_table(int k) {
  if (k < 1) throw UsageError("cyclic group order must be positive");
  CharacterTable ct;
  ct.order = k;
  ct.class_sizes.assign(static_cast<std::size_t>(k), 1);
  for (int g = 0; g < k; ++g) ct.square_class.push_back((2 * g) % k);
  for (int r = 0; r < k; ++r) {
    std::vector<std::complex<double>> row;
    for (int g = 0; g < k; ++g) row.push_back(std::polar(1.0, 2 * std::numbers::pi * r * g / k));
    ct.chars.push_back(std::move(row));
  }
  return ct;
}

FrobeniusSchurSplit frobenius_schur_split(const CharacterTable& ct) {
  ct.validate();
  FrobeniusSchurSplit out;
  for (const auto& chi : ct.chars) {
    std::complex<double> s = 0;
    for (std::size_t c = 0; c < chi.size(); ++c)
      s += static_cast<double>(ct.class_sizes[c]) * chi[static_cast<std::size_t>(ct.square_class[c])];
    s /= static_cast<double>(ct.order);
    double r = std::round(s.real());
    if (std::abs(s - r) > 1e-6 || std::abs(r) > 1)
      throw UsageError("non-integral Frobenius-Schur indicator: character table is inconsistent");
    int v = static_cast<int>(r);
    out.indicators.push_back(v);
    (v == 1 ? out.n1 : v == 0 ? out.n0 : out.n_minus1) += 1;
  }
  if (out.n0 % 2 != 0) throw UsageError("complex-type irreducibles must come in conjugate pairs");
  return out;
}

KGroup kgroup_group(CartanLabel label, int d, const CharacterTable& ct) {
  auto fs = frobenius_schur_split(ct);
  const int j = degree(label) - d;
  KGroup g;
  if (is_complex(label)) {
    g = Kc(j).times(static_cast<int>(ct.chars.size()));
  } else {
    g = KR(j).times(fs.n1);
    g += Kc(j).times(fs.n0 / 2);
    g += KQ(j).times(fs.n_minus1);
  }
  g.provenance = "point group |G|=" + std::to_string(ct.order) + ": " + to_string(label) + " d=" +
                 std::to_string(d);
  return g;
}

}  // namespace roelab::sym
