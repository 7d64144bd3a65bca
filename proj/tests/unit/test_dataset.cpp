#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qtele/dataset.hpp"
#include "qtele/errors.hpp"

namespace qtele {
namespace {

std::vector<DataPoint> parse(const std::string& text) {
  std::istringstream in(text);
  return read_dataset(in);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.line();
  }
  return 0;
}

TEST(ReadDataset, ParsesRowsCommentsAndBlanks) {
  const auto d = parse("# digitized\nalpha2,y,sigma,kind\n\n1e-3,0.25,0.01,two_fold\n# mid\n2e-3,0.6,0.03,fidelity_x\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].alpha2, 1e-3);
  EXPECT_EQ(d[0].kind, DataKind::kTwoFold);
  EXPECT_EQ(d[1].y, 0.6);
  EXPECT_EQ(d[1].sigma, 0.03);
  EXPECT_EQ(d[1].kind, DataKind::kFidelityX);
}

TEST(ReadDataset, ToleratesCrLf) {
  EXPECT_EQ(parse("alpha2,y,sigma,kind\r\n1e-3,0.2,0.01,three_fold\r\n").size(), 1u);
}

TEST(ReadDataset, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line("alpha2,y,sigma,kind\n1e-3,0.2,0.01,two_fold\n1e-3,abc,0.01,two_fold\n"), 3u);
  EXPECT_EQ(error_line("alpha2,y,sigma,kind\n1e-3,0.2,0.01\n"), 2u);
  EXPECT_EQ(error_line("# c\nalpha2,y,sigma,kind\n\n-1e-3,0.2,0.01,two_fold\n"), 4u);
  EXPECT_EQ(error_line("alpha2,y,sigma,kind\n1e-3,-0.2,0.01,two_fold\n"), 2u);
  EXPECT_EQ(error_line("alpha2,y,sigma,kind\n1e-3,0.2,-1,two_fold\n"), 2u);
  EXPECT_EQ(error_line("alpha2,y,sigma,kind\n1e-3,0.2,0.1,five_fold\n"), 2u);
  EXPECT_EQ(error_line("x,y,sigma,kind\n1e-3,0.2,0.1,two_fold\n"), 1u);
  EXPECT_EQ(error_line("alpha2,y,sigma,kind\n1e-3,0.2x,0.1,two_fold\n"), 2u);
}

TEST(ReadDataset, EmptyInputsRejected) {
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse("# only a comment\n"), DataError);
  EXPECT_THROW(parse("alpha2,y,sigma,kind\n"), DataError);
  EXPECT_THROW(read_dataset(std::filesystem::path("/nonexistent/qtele.csv")), DataError);
}

TEST(WriteDataset, RoundTripsExactly) {
  const std::vector<DataPoint> d{{1.0 / 3.0, 0.1 + 0.2, std::sqrt(2.0) * 1e-3, DataKind::kThreeFold},
                                 {7.123456789012345e-5, 0.0, 0.0, DataKind::kTwoFold}};
  std::ostringstream out;
  write_dataset(out, d, {"generated", "second comment"});
  EXPECT_EQ(out.str().rfind("# generated\n", 0), 0u);
  const auto back = parse(out.str());
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back[i].alpha2, d[i].alpha2);
    EXPECT_EQ(back[i].y, d[i].y);
    EXPECT_EQ(back[i].sigma, d[i].sigma);
    EXPECT_EQ(back[i].kind, d[i].kind);
  }
}

TEST(Grids, EndpointsAndSpacing) {
  const auto g = log_grid(1e-5, 1e-1, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_EQ(g.front(), 1e-5);
  EXPECT_EQ(g.back(), 1e-1);
  EXPECT_NEAR(g[2], 1e-3, 1e-15);
  const auto l = linear_grid(0.0, 1.0, 3);
  EXPECT_EQ(l[1], 0.5);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), InvalidArgument);
  EXPECT_THROW(linear_grid(0.0, 1.0, 1), InvalidArgument);
}

TEST(Synthesize, NoiselessMatchesModel) {
  ModelParameters p;
  const auto d = synthesize(DataKind::kTwoFold, p, {1e-3, 2e-3}, 0.0, 1);
  EXPECT_EQ(d[0].y, model_value(DataKind::kTwoFold, 1e-3, p));
  EXPECT_NEAR(d[0].sigma, 0.02 * d[0].y, 1e-18);
}

TEST(Synthesize, SeededNoise) {
  ModelParameters p;
  const auto grid = log_grid(1e-4, 1e-2, 10);
  const auto a = synthesize(DataKind::kThreeFold, p, grid, 0.02, 9);
  const auto b = synthesize(DataKind::kThreeFold, p, grid, 0.02, 9);
  const auto c = synthesize(DataKind::kThreeFold, p, grid, 0.02, 10);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    EXPECT_EQ(a[i].y, b[i].y);
    EXPECT_GE(a[i].y, 0.0);
  }
  EXPECT_NE(a[3].y, c[3].y);
}

}  // namespace
}  // namespace qtele
