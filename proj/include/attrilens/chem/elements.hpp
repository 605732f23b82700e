#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace attrilens::chem {

struct ElementInfo {
  int atomic_number;
  std::string_view symbol;
  double average_mass;  // IUPAC standard atomic weight, Da
};

namespace detail {

inline constexpr std::array<ElementInfo, 92> kElements = {{
    {1, "H", 1.0080},
    {2, "He", 4.0030},
    {3, "Li", 6.9410},
    {4, "Be", 9.0120},
    {5, "B", 10.8120},
    {6, "C", 12.0110},
    {7, "N", 14.0070},
    {8, "O", 15.9990},
    {9, "F", 18.9980},
    {10, "Ne", 20.1800},
    {11, "Na", 22.9900},
    {12, "Mg", 24.3050},
    {13, "Al", 26.9820},
    {14, "Si", 28.0860},
    {15, "P", 30.9740},
    {16, "S", 32.0670},
    {17, "Cl", 35.4530},
    {18, "Ar", 39.9480},
    {19, "K", 39.0980},
    {20, "Ca", 40.0780},
    {21, "Sc", 44.9560},
    {22, "Ti", 47.8670},
    {23, "V", 50.9440},
    {24, "Cr", 51.9960},
    {25, "Mn", 54.9380},
    {26, "Fe", 55.8450},
    {27, "Co", 58.9330},
    {28, "Ni", 58.6930},
    {29, "Cu", 63.5460},
    {30, "Zn", 65.3900},
    {31, "Ga", 69.7230},
    {32, "Ge", 72.6100},
    {33, "As", 74.9220},
    {34, "Se", 78.9600},
    {35, "Br", 79.9040},
    {36, "Kr", 83.8000},
    {37, "Rb", 85.4680},
    {38, "Sr", 87.6200},
    {39, "Y", 88.9060},
    {40, "Zr", 91.2240},
    {41, "Nb", 92.9060},
    {42, "Mo", 95.9400},
    {43, "Tc", 98.0000},
    {44, "Ru", 101.0700},
    {45, "Rh", 102.9060},
    {46, "Pd", 106.4200},
    {47, "Ag", 107.8680},
    {48, "Cd", 112.4120},
    {49, "In", 114.8180},
    {50, "Sn", 118.7110},
    {51, "Sb", 121.7600},
    {52, "Te", 127.6000},
    {53, "I", 126.9040},
    {54, "Xe", 131.2900},
    {55, "Cs", 132.9050},
    {56, "Ba", 137.3280},
    {57, "La", 138.9060},
    {58, "Ce", 140.1160},
    {59, "Pr", 140.9080},
    {60, "Nd", 144.2400},
    {61, "Pm", 145.0000},
    {62, "Sm", 150.3600},
    {63, "Eu", 151.9640},
    {64, "Gd", 157.2500},
    {65, "Tb", 158.9250},
    {66, "Dy", 162.5000},
    {67, "Ho", 164.9300},
    {68, "Er", 167.2600},
    {69, "Tm", 168.9340},
    {70, "Yb", 173.0400},
    {71, "Lu", 174.9670},
    {72, "Hf", 178.4900},
    {73, "Ta", 180.9480},
    {74, "W", 183.8400},
    {75, "Re", 186.2070},
    {76, "Os", 190.2300},
    {77, "Ir", 192.2170},
    {78, "Pt", 195.0780},
    {79, "Au", 196.9670},
    {80, "Hg", 200.5900},
    {81, "Tl", 204.3830},
    {82, "Pb", 207.2000},
    {83, "Bi", 208.9800},
    {84, "Po", 209.0000},
    {85, "At", 210.0000},
    {86, "Rn", 222.0000},
    {87, "Fr", 223.0000},
    {88, "Ra", 226.0250},
    {89, "Ac", 227.0280},
    {90, "Th", 232.0380},
    {91, "Pa", 231.0360},
    {92, "U", 238.0290},
}};

struct IsotopeMass {
  int atomic_number;
  int mass_number;
  double mass;
};

// Isotopes that actually show up in drug-like datasets (tracers, deuteration).
inline constexpr std::array<IsotopeMass, 39> kIsotopes = {{
    {1, 1, 1.007825}, {1, 2, 2.014102}, {1, 3, 3.016049},
    {6, 11, 11.011434}, {6, 12, 12.0}, {6, 13, 13.003355}, {6, 14, 14.003242},
    {7, 13, 13.005739}, {7, 15, 15.000109}, {8, 18, 17.999161}, {9, 18, 18.000938},
    {15, 32, 31.973907}, {16, 35, 34.969032}, {24, 51, 50.944767},
    {27, 57, 56.936291}, {27, 60, 59.933817}, {29, 64, 63.929764},
    {31, 67, 66.928202}, {31, 68, 67.927980}, {34, 75, 74.922523},
    {35, 76, 75.924541}, {36, 81, 80.916592}, {37, 82, 81.918209},
    {38, 89, 88.907451}, {39, 90, 89.907152}, {43, 98, 97.907216},
    {43, 99, 98.906255}, {49, 111, 110.905103}, {53, 123, 122.905589},
    {53, 125, 124.904630}, {53, 131, 130.906125}, {54, 127, 126.905184},
    {54, 129, 128.904779}, {54, 133, 132.905911}, {62, 153, 152.922097},
    {71, 177, 176.943758}, {80, 197, 196.967213}, {81, 201, 200.970819}, {88, 223, 223.018502},
}};

}  // namespace detail

inline const ElementInfo* element_by_number(int z) {
  if (z < 1 || z > static_cast<int>(detail::kElements.size())) return nullptr;
  return &detail::kElements[static_cast<std::size_t>(z - 1)];
}

inline std::optional<int> element_by_symbol(std::string_view symbol) {
  for (const auto& e : detail::kElements) {
    if (e.symbol == symbol) return e.atomic_number;
  }
  return std::nullopt;
}

inline std::string_view element_symbol(int z) {
  const auto* e = element_by_number(z);
  return e ? e->symbol : std::string_view{"?"};
}

inline double atomic_mass(int z, int isotope = 0) {
  if (isotope > 0) {
    for (const auto& iso : detail::kIsotopes) {
      if (iso.atomic_number == z && iso.mass_number == isotope) return iso.mass;
    }
    return static_cast<double>(isotope);
  }
  const auto* e = element_by_number(z);
  return e ? e->average_mass : 0.0;
}

/// Default valences used to derive implicit hydrogens on organic-subset atoms.
inline std::span<const int> organic_valences(int z) {
  static constexpr int kB[] = {3};
  static constexpr int kC[] = {4};
  static constexpr int kN[] = {3};
  static constexpr int kO[] = {2};
  static constexpr int kP[] = {3, 5};
  static constexpr int kS[] = {2, 4, 6};
  static constexpr int kHal[] = {1};
  switch (z) {
    case 5: return kB;
    case 6: return kC;
    case 7: return kN;
    case 8: return kO;
    case 15: return kP;
    case 16: return kS;
    case 9:
    case 17:
    case 35:
    case 53: return kHal;
    default: return {};
  }
}

inline bool is_organic_subset(int z) { return !organic_valences(z).empty(); }

inline bool is_halogen(int z) { return z == 9 || z == 17 || z == 35 || z == 53 || z == 85; }

}  // namespace attrilens::chem
