#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "hubfair/design.hpp"

using namespace hubfair;

namespace {

std::vector<std::string> labels_with_prefix(const DesignMatrix& d, const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& l : d.column_labels)
    if (l.rfind(prefix, 0) == 0) out.push_back(l);
  return out;
}

}  // namespace

TEST(ModelCatalog, NamesAndVariants) {
  EXPECT_EQ(model_names().size(), 10u);
  const auto s = model_spec("GLM-2c");
  EXPECT_EQ(s.sensitive, SensitiveBlock::Urbanicity);
  ASSERT_TRUE(s.interaction_with);
  EXPECT_EQ(*s.interaction_with, Factor::ModelType);
  EXPECT_FALSE(model_spec("GLM-1").interaction_with);
  EXPECT_THROW(model_spec("GLM-3"), InputError);
  EXPECT_THROW(model_spec("GLM-1e"), InputError);
}

TEST(BuildDesign, FourLevelsGiveThreeDummies) {
  const auto obs = fixture::toy_panel(1);
  const auto d = build_design(model_spec("GLM-1"), obs);
  EXPECT_EQ(labels_with_prefix(d, "lookahead"),
            (std::vector<std::string>{"lookahead14", "lookahead21", "lookahead28"}));
  EXPECT_EQ(labels_with_prefix(d, "phase"), (std::vector<std::string>{"phase1", "phase2"}));
  EXPECT_EQ(d.column_labels.front(), "(Intercept)");
  EXPECT_EQ(d.sensitive_columns(), (std::vector<std::string>{"pct_asian", "pct_black", "pct_hispanic"}));
}

TEST(BuildDesign, RaceByLookaheadHasNineInteractions) {
  const auto obs = fixture::toy_panel(2);
  const auto d = build_design(model_spec("GLM-1a"), obs);
  std::size_t n = 0;
  for (const auto& l : d.column_labels) n += l.find(':') != std::string::npos;
  EXPECT_EQ(n, 9u);
  ASSERT_TRUE(d.column("pct_hispanic:lookahead14"));
  const auto h = *d.column("pct_hispanic"), l = *d.column("lookahead14");
  const auto i = *d.column("pct_hispanic:lookahead14");
  for (Eigen::Index r = 0; r < d.X.rows(); ++r)
    EXPECT_EQ(d.X(r, static_cast<Eigen::Index>(i)),
              d.X(r, static_cast<Eigen::Index>(h)) * d.X(r, static_cast<Eigen::Index>(l)));
}

TEST(BuildDesign, UrbanicityBlock) {
  const auto obs = fixture::toy_panel(3);
  const auto d = build_design(model_spec("GLM-2"), obs);
  EXPECT_EQ(d.sensitive_columns(), (std::vector<std::string>{"urb_SMM", "urb_MC"}));
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto g = obs[k].covariates->urbanicity();
    const auto r = static_cast<Eigen::Index>(k);
    EXPECT_EQ(d.X(r, 1), g == UrbanicityGroup::SMM ? 1.0 : 0.0);
    EXPECT_EQ(d.X(r, 2), g == UrbanicityGroup::MC ? 1.0 : 0.0);
  }
}

TEST(BuildDesign, ColumnCountFormula) {
  const auto obs = fixture::toy_panel(4);
  // intercept + sensitive + (L-1)+(P-1)+(M-1)+(B-1) + interactions + 9 health + age + (S-1)
  const std::size_t chars = 3 + 2 + 1 + 1;
  EXPECT_EQ(build_design(model_spec("GLM-1"), obs).cols(), 1 + 3 + chars + 9 + 1 + 2);
  EXPECT_EQ(build_design(model_spec("GLM-1b"), obs).cols(), 1 + 3 + chars + 3 * 2 + 9 + 1 + 2);
  EXPECT_EQ(build_design(model_spec("GLM-2a"), obs).cols(), 1 + 2 + chars + 2 * 3 + 9 + 1 + 2);
  EXPECT_EQ(build_design(model_spec("GLM-2d"), obs).cols(), 1 + 2 + chars + 2 * 1 + 9 + 1 + 2);
}

TEST(BuildDesign, HypothesisVectors) {
  const auto obs = fixture::toy_panel(5);
  const auto d = build_design(model_spec("GLM-1a"), obs);
  const auto ref = hypothesis_vector(d, "pct_black", Factor::Lookahead, "7");
  EXPECT_EQ(ref.sum(), 1.0);
  EXPECT_EQ(ref[static_cast<Eigen::Index>(*d.column("pct_black"))], 1.0);
  const auto c = hypothesis_vector(d, "pct_black", Factor::Lookahead, "21");
  EXPECT_EQ(c.sum(), 2.0);
  EXPECT_EQ(c[static_cast<Eigen::Index>(*d.column("pct_black:lookahead21"))], 1.0);
  EXPECT_THROW(hypothesis_vector(d, "pct_black", Factor::Lookahead, "35"), DesignError);
  EXPECT_THROW(hypothesis_vector(d, "pct_white", Factor::Lookahead, "14"), DesignError);
}

TEST(BuildDesign, Deterministic) {
  const auto obs = fixture::toy_panel(6);
  std::ostringstream a, b;
  write_design(a, build_design(model_spec("GLM-2b"), obs));
  write_design(b, build_design(model_spec("GLM-2b"), obs));
  EXPECT_EQ(a.str(), b.str());
}

TEST(BuildDesign, MissingReferenceLevel) {
  auto obs = fixture::toy_panel(7);
  std::erase_if(obs, [](const PblObservation& o) { return o.lookahead_days == 7; });
  EXPECT_THROW(build_design(model_spec("GLM-1"), obs), DesignError);
  auto spec = model_spec("GLM-1");
  spec.reference_levels[Factor::Lookahead] = "14";
  EXPECT_EQ(build_design(spec, obs).column_labels[4], "lookahead21");
}

TEST(BuildDesign, DropTermKeepsSpecInSync) {
  const auto obs = fixture::toy_panel(8);
  const auto d = build_design(model_spec("GLM-1"), obs);
  const auto smaller = d.without_term("DIABETES");
  EXPECT_EQ(smaller.cols(), d.cols() - 1);
  EXPECT_FALSE(smaller.column("DIABETES"));
  const auto rebuilt = build_design(smaller.spec, obs);
  EXPECT_EQ(rebuilt.column_labels, smaller.column_labels);
  EXPECT_TRUE(rebuilt.X.isApprox(smaller.X, 0.0));
  EXPECT_THROW(d.without_term("(Intercept)"), DesignError);
}
