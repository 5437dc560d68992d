#include <gtest/gtest.h>

#include <sstream>

#include "racelab/track/grid.hpp"
#include "support.hpp"

namespace racelab::track {
namespace {

constexpr const char* kFree4x4 =
    "RLGRID 1\nwidth 4\nheight 4\nresolution 0.05\norigin_x 0\norigin_y 0\n....\n....\n....\n....\n";

TEST(Grid, ParsesAllFreeGrid) {
  std::istringstream in(kFree4x4);
  const auto g = parse_grid(in);
  EXPECT_EQ(g.width, 4);
  EXPECT_EQ(g.height, 4);
  EXPECT_DOUBLE_EQ(g.resolution, 0.05);
  EXPECT_EQ(g.free_count(), 16u);
}

TEST(Grid, ShortPayloadIsTruncation) {
  std::istringstream in("RLGRID 1\nwidth 4\nheight 4\nresolution 0.05\norigin_x 0\norigin_y 0\n....\n....\n....\n...\n");
  EXPECT_THROW(parse_grid(in), TruncationError);
  std::istringstream missing_rows("RLGRID 1\nwidth 4\nheight 4\nresolution 0.05\norigin_x 0\norigin_y 0\n....\n");
  EXPECT_THROW(parse_grid(missing_rows), TruncationError);
}

TEST(Grid, MalformedHeaderIsFormatError) {
  std::istringstream no_magic("GRID\nwidth 4\n");
  EXPECT_THROW(parse_grid(no_magic), FormatError);
  std::istringstream bad_number("RLGRID 1\nwidth four\nheight 4\nresolution 0.05\norigin_x 0\norigin_y 0\n");
  EXPECT_THROW(parse_grid(bad_number), FormatError);
  std::istringstream missing_key("RLGRID 1\nwidth 4\nheight 4\nresolution 0.05\norigin_x 0\nfoo 0\n");
  EXPECT_THROW(parse_grid(missing_key), FormatError);
  std::istringstream zero_res("RLGRID 1\nwidth 4\nheight 4\nresolution 0\norigin_x 0\norigin_y 0\n");
  EXPECT_THROW(parse_grid(zero_res), FormatError);
  std::istringstream bad_cell("RLGRID 1\nwidth 2\nheight 1\nresolution 0.1\norigin_x 0\norigin_y 0\n.x\n");
  EXPECT_THROW(parse_grid(bad_cell), FormatError);
}

TEST(Grid, OutOfBoundsIsOccupied) {
  std::istringstream in(kFree4x4);
  const auto g = parse_grid(in);
  EXPECT_FALSE(g.occupied(0, 0));
  EXPECT_TRUE(g.occupied(-1, 0));
  EXPECT_TRUE(g.occupied(4, 0));
  EXPECT_TRUE(g.occupied_at({-0.01, 0.1}));
  EXPECT_TRUE(g.occupied_at({0.1, 0.2}));
  EXPECT_FALSE(g.occupied_at({0.1, 0.1}));
}

TEST(Grid, BundledAssetsRoundTripByteExact) {
  for (const char* name : {"oval", "porto"}) {
    const auto path = testing::asset(std::string(name) + ".grid");
    const auto g = load_grid(path);
    EXPECT_EQ(format_grid(g), testing::read_file(path)) << name;
    EXPECT_EQ(g.free_count(), testing::track_meta(name).free_cells) << name;
    std::istringstream again(format_grid(g));
    EXPECT_EQ(parse_grid(again), g);
  }
}

TEST(Grid, CastRayHitsAxisAlignedWall) {
  OccupancyGrid g(100, 20, 0.05, {-1.0, -0.5});
  for (int r = 0; r < g.height; ++r)
    for (int c = 0; c < g.width; ++c)
      if (g.cell_center(c, r).x >= 3.0) g.set(c, r, true);
  EXPECT_NEAR(cast_ray(g, {0.0, 0.0}, 0.0, 10.0), 3.0, 1e-9);
  EXPECT_DOUBLE_EQ(cast_ray(g, {0.0, 0.0}, 0.0, 2.0), 2.0);
  // 45 degrees: the wall is reached after 3 * sqrt(2) unless the side wall comes first
  EXPECT_LE(cast_ray(g, {0.0, 0.0}, std::numbers::pi / 4, 10.0), 3.0 * std::sqrt(2.0) + 1e-9);
  EXPECT_DOUBLE_EQ(cast_ray(g, {3.5, 0.0}, 0.0, 10.0), 0.0);
}

}  // namespace
}  // namespace racelab::track
