#include <gtest/gtest.h>

#include <fstream>

#include "models.hpp"
#include "wcp/config.hpp"

using namespace wcp;
namespace models = testing_models;
using nlohmann::json;

namespace {

json raw(const std::string& name) {
  std::ifstream is(models::config_path(name));
  json j;
  is >> j;
  return j;
}

}  // namespace

TEST(Config, ShippedConfigsParse) {
  for (const char* name : {"compact_polynomial", "c0_preserving", "irreducible_growing", "growing_rowsum", "ou_oracle"}) {
    RunConfig rc;
    ASSERT_NO_THROW(rc = models::shipped(name)) << name;
    EXPECT_EQ(rc.hash.size(), 16u);
    EXPECT_NO_THROW(rc.domain());
  }
}

TEST(Config, FieldsReachTheRunConfig) {
  const auto rc = models::shipped("ou_oracle");
  EXPECT_EQ(rc.model.m, 2);
  EXPECT_EQ(rc.grid.N, 201);
  EXPECT_DOUBLE_EQ(rc.grid.L, 8.0);
  EXPECT_EQ(rc.evolve.scheme, Scheme::theta);
  EXPECT_DOUBLE_EQ(rc.evolve.dt, 0.005);
  ASSERT_TRUE(rc.exhaustion.has_value());
  EXPECT_EQ(rc.exhaustion->ladder.size(), 4u);
  ASSERT_TRUE(rc.measures.has_value());
  EXPECT_DOUBLE_EQ(rc.measures->horizon, 80.0);
  EXPECT_EQ(rc.measures->scheme, Scheme::implicit_euler);
  const Vec f0 = rc.evolve.initial.function()(Vec::Zero(1));
  EXPECT_DOUBLE_EQ(f0(0), 1.0);
  EXPECT_DOUBLE_EQ(f0(1), 0.5);
}

TEST(Config, HashIsStableAndSensitive) {
  json a = raw("ou_oracle");
  EXPECT_EQ(parse_config(a).hash, parse_config(raw("ou_oracle")).hash);
  json b = a;
  b["grid"]["N"] = 203;
  EXPECT_NE(parse_config(b).hash, parse_config(a).hash);
}

TEST(Config, UnknownKeysAreRejected) {
  for (const char* section : {"grid", "evolve", "measures", "exhaustion"}) {
    json j = raw("ou_oracle");
    j[section]["colour"] = 1;
    EXPECT_THROW(parse_config(j), ConfigError) << section;
  }
  json j = raw("ou_oracle");
  j["extras"] = json::object();
  EXPECT_THROW(parse_config(j), ConfigError);
}

TEST(Config, MalformedValuesAreRejected) {
  auto broken = [](auto edit) {
    json j = raw("ou_oracle");
    edit(j);
    return j;
  };
  EXPECT_THROW(parse_config(broken([](json& j) { j["model"] = json::object(); })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j.erase("model"); })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["model"]["kind"] = "spectral"; })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["evolve"]["scheme"] = "implicit_euler"; })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["evolve"]["t_end"] = -1.0; })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["grid"]["N"] = 20.5; })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["grid"]["bc"] = "robin"; })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["evolve"]["initial"]["amplitude"] = {1, 2, 3}; })), ConfigError);
  EXPECT_THROW(parse_config(broken([](json& j) { j["model"]["coupling"] = {{1.0}}; })), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, PolynomialModelReadsTimeFunctions) {
  const auto rc = models::shipped("compact_polynomial");
  ASSERT_TRUE(rc.model.polynomial.has_value());
  EXPECT_FALSE(rc.model.autonomous);
  EXPECT_EQ(rc.verify.require.back(), "compactness");
}
