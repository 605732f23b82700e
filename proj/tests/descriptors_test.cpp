#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "attrilens/chem/scaffold.hpp"
#include "attrilens/chem/smiles.hpp"
#include "attrilens/descriptors/compute.hpp"
#include "attrilens/descriptors/registry.hpp"
#include "support/random_smiles.hpp"

using namespace attrilens;

namespace {

double value(const std::string& smiles, const std::string& name) {
  const auto mol = chem::parse_smiles(smiles);
  const auto* id = descriptors::Registry::bundled().find(name);
  if (id == nullptr) throw std::invalid_argument("no descriptor " + name);
  return descriptors::compute_value(mol, *id);
}

std::vector<const descriptors::DescriptorId*> implemented() {
  std::vector<const descriptors::DescriptorId*> out;
  for (const auto& e : descriptors::Registry::bundled().entries()) {
    if (e.implemented && descriptors::has_calculator(e.canonical_name)) out.push_back(&e);
  }
  return out;
}

const char* const kAspirin = "CC(=O)Oc1ccccc1C(=O)O";
const char* const kCaseStudy = "CN(C(=O)Cc1ccc(Cl)c(Cl)c1)C1CCCC[C@H]1N1CCCC1";

}  // namespace

TEST(DescriptorOracles, HandDerived) {
  EXPECT_NEAR(value("O", "MolWt"), 18.015, 0.01);
  EXPECT_EQ(value("c1ccccc1", "TPSA"), 0.0);
  EXPECT_EQ(value("c1ccccc1", "NumAromaticRings"), 1.0);
  EXPECT_EQ(value("CCO", "NumHDonors"), 1.0);
  EXPECT_EQ(value("CCO", "NumHAcceptors"), 1.0);
  EXPECT_NEAR(value(kAspirin, "TPSA"), 63.60, 0.05);
  EXPECT_EQ(value(kCaseStudy, "HeavyAtomCount"), 24.0);
}

struct ToolkitRow {
  const char* smiles;
  double mol_wt, log_p, tpsa;
  int hbd, hba, rotatable, rings, aromatic_rings, heavy;
  double fsp3;
};

// MolWt, MolLogP, TPSA, ring counts, heavy atoms and FractionCSP3 are RDKit
// reference values. Donors (N/O atoms bearing H), acceptors (all N and O) and
// rotatable bonds (amide C-N excluded) are counted by hand.
const ToolkitRow kToolkitRows[] = {
    {"O", 18.015, -0.8247, 31.5, 1, 1, 0, 0, 0, 1, 0.0},
    {"c1ccccc1", 78.114, 1.6866, 0.0, 0, 0, 0, 1, 1, 6, 0.0},
    {"CCO", 46.069, -0.0014, 20.23, 1, 1, 0, 0, 0, 3, 1.0},
    {kAspirin, 180.159, 1.3101, 63.6, 1, 4, 3, 1, 1, 13, 0.1111},
    {kCaseStudy, 369.336, 4.4013, 23.55, 0, 3, 4, 3, 1, 24, 0.6316},
    {"CN1C=NC2=C1C(=O)N(C(=O)N2C)C", 194.194, -1.0293, 61.82, 0, 6, 0, 2, 2, 14, 0.375},
    {"Nc1nc2ccccc2cc1CCC(=O)NCC1CCCCC1", 311.429, 3.4461, 68.01, 2, 4, 5, 3, 2, 23, 0.4737},
};

class ReferencePanel : public ::testing::TestWithParam<ToolkitRow> {};

TEST_P(ReferencePanel, MatchesReference) {
  const auto& r = GetParam();
  EXPECT_NEAR(value(r.smiles, "MolWt"), r.mol_wt, 1e-3);
  EXPECT_NEAR(value(r.smiles, "MolLogP"), r.log_p, 1e-3);
  EXPECT_NEAR(value(r.smiles, "TPSA"), r.tpsa, 1e-3);
  EXPECT_EQ(value(r.smiles, "NumHDonors"), r.hbd);
  EXPECT_EQ(value(r.smiles, "NumHAcceptors"), r.hba);
  EXPECT_EQ(value(r.smiles, "NumRotatableBonds"), r.rotatable);
  EXPECT_EQ(value(r.smiles, "RingCount"), r.rings);
  EXPECT_EQ(value(r.smiles, "NumAromaticRings"), r.aromatic_rings);
  EXPECT_EQ(value(r.smiles, "HeavyAtomCount"), r.heavy);
  EXPECT_NEAR(value(r.smiles, "FractionCSP3"), r.fsp3, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(Panel, ReferencePanel, ::testing::ValuesIn(kToolkitRows));

TEST(Descriptors, UnimplementedThrows) {
  const auto* id = descriptors::Registry::bundled().find("BertzCT");
  ASSERT_NE(id, nullptr);
  EXPECT_FALSE(id->implemented);
  EXPECT_THROW(descriptors::compute_value(chem::parse_smiles("CCO"), *id), descriptors::Unimplemented);
}

TEST(Descriptors, ProfileMemoizesSameValues) {
  const auto mol = chem::parse_smiles(kAspirin);
  descriptors::DescriptorProfile profile(mol);
  for (const auto* id : implemented()) {
    EXPECT_EQ(profile.get(*id), descriptors::compute_value(mol, *id)) << id->canonical_name;
    EXPECT_EQ(profile.get(*id), profile.get(*id));
  }
}

TEST(DescriptorProperties, CountsAreNonNegativeIntegers) {
  for (const char* s : {"O", kAspirin, kCaseStudy, "C[NH3+].[Cl-]", "FC(F)(F)c1ccc(S(=O)(=O)N)cc1"}) {
    const auto mol = chem::parse_smiles(s);
    for (const auto* id : implemented()) {
      const double v = descriptors::compute_value(mol, *id);
      EXPECT_TRUE(std::isfinite(v)) << s << " " << id->canonical_name;
      if (id->canonical_name.rfind("Num", 0) == 0 || id->canonical_name.find("Count") != std::string::npos) {
        EXPECT_GE(v, 0.0);
        EXPECT_EQ(v, std::floor(v)) << s << " " << id->canonical_name;
      }
    }
  }
}

TEST(DescriptorProperties, RingClassesPartitionRings) {
  for (const char* s : {kCaseStudy, "c1ccc2c(c1)CCN2C1CCOCC1", "C1CC2CCC1C2", "c1ccncc1"}) {
    const double rings = value(s, "RingCount");
    EXPECT_EQ(value(s, "NumAromaticRings") + value(s, "NumAliphaticRings"), rings) << s;
    EXPECT_EQ(value(s, "NumAromaticCarbocycles") + value(s, "NumAromaticHeterocycles"), value(s, "NumAromaticRings"));
    EXPECT_EQ(value(s, "NumAliphaticCarbocycles") + value(s, "NumAliphaticHeterocycles"),
              value(s, "NumAliphaticRings"));
    EXPECT_LE(value(s, "NumSaturatedRings"), value(s, "NumAliphaticRings"));
  }
}

// Every descriptor and the scaffold key must not depend on atom order.
TEST(DescriptorProperties, AtomPermutationInvariance) {
  const std::vector<std::string> panel = {
      kAspirin, kCaseStudy, "CN1C=NC2=C1C(=O)N(C(=O)N2C)C", "Nc1nc2ccccc2cc1CCC(=O)NCC1CCCCC1",
      "C[NH+]1C[C@H](C(=O)N[C@]2(C)O[C@@]3(O)[C@@H]4CCCN4C(=O)[C@H](Cc4ccccc4)N3C2=O)C[C@@H]2c3cccc4[nH]cc(c34)C[C@H]21",
      "FC(F)(F)c1ccc(S(=O)(=O)N)cc1", "C1CC2CCC1C2", "OC(=O)c1ccccc1.[Na+]", "Clc1ccc2Sc3ccccc3N(CCCN(C)C)c2c1",
      "O=C1NC(=O)C(c2ccccc2)(c2ccccc2)N1"};
  const auto ids = implemented();
  std::mt19937_64 rng(7);
  constexpr int kPermutations = 500;
  for (int k = 0; k < kPermutations; ++k) {
    const auto& base_smiles = panel[static_cast<std::size_t>(k) % panel.size()];
    const auto base = chem::parse_smiles(base_smiles);
    const auto shuffled_text = attrilens::testing::random_smiles(base, rng);
    const auto shuffled = chem::parse_smiles(shuffled_text);
    ASSERT_EQ(chem::scaffold_key(shuffled), chem::scaffold_key(base)) << shuffled_text;
    ASSERT_EQ(chem::canonical_key(shuffled), chem::canonical_key(base)) << shuffled_text;
    for (const auto* id : ids) {
      ASSERT_NEAR(descriptors::compute_value(shuffled, *id), descriptors::compute_value(base, *id), 1e-9)
          << base_smiles << " vs " << shuffled_text << " on " << id->canonical_name;
    }
  }
}
