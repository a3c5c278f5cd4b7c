#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "ratekit/error.hpp"
#include "ratekit/io.hpp"
#include "ratekit/simgen.hpp"

namespace ratekit::io {
namespace {

TEST(FormatDouble, RoundTripsExactly) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
    EXPECT_EQ(std::strtod(format_double(v).c_str(), nullptr), v);
  }
}

TEST(DatasetCsv, RoundTripIsBitExact) {
  SynthSpec spec;
  spec.n = 50;
  spec.p = 10;
  spec.frac_causal = 0.3;
  spec.seed = 2;
  const Dataset d = synth_classification(spec).data;
  const std::string text = dataset_to_csv(d);
  const Dataset back = dataset_from_csv(text);
  EXPECT_EQ(back.x, d.x);
  EXPECT_EQ(back.y, d.y);
  EXPECT_EQ(back.feature_names, d.feature_names);
  EXPECT_EQ(dataset_to_csv(back), text);
}

TEST(DatasetCsv, RejectsMalformedInput) {
  EXPECT_THROW(dataset_from_csv(""), InvalidInput);
  EXPECT_THROW(dataset_from_csv("a,b\n1,2\n"), InvalidInput);
  EXPECT_THROW(dataset_from_csv("a,y\n1\n"), InvalidInput);
  EXPECT_THROW(dataset_from_csv("a,y\n1,abc\n"), InvalidInput);
  EXPECT_THROW(dataset_from_csv("a,y\n1,nan\n"), InvalidInput);
  EXPECT_THROW(dataset_from_csv("a,y\n"), InvalidInput);
}

TEST(MaskJson, RoundTrip) {
  const std::vector<bool> mask{true, false, false, true};
  EXPECT_EQ(mask_from_json(mask_to_json(mask, 4)), mask);
  EXPECT_THROW(mask_from_json(json::object()), InvalidInput);
}

TEST(ModelJson, RoundTripIsBitExact) {
  NetworkConfig cfg;
  cfg.input_dim = 4;
  cfg.hidden_sizes = {6, 3};
  cfg.link = Link::softmax;
  cfg.n_classes = 3;
  cfg.prior_scale = 0.7;
  Network net = build_network(cfg, 11);
  net.log_var(1, 2) = -3.141592653589793;
  const json doc = network_to_json(net);
  const Network back = network_from_json(json::parse(doc.dump()));
  EXPECT_EQ(flatten(back), flatten(net));
  EXPECT_EQ(back.seed, 11u);
  EXPECT_EQ(back.config.hidden_sizes, cfg.hidden_sizes);
  EXPECT_EQ(back.config.link, Link::softmax);
  EXPECT_EQ(network_to_json(back).dump(), doc.dump());
}

TEST(ModelJson, RejectsWrongFormatOrShape) {
  NetworkConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_sizes = {3};
  json doc = network_to_json(build_network(cfg, 1));
  json bad_version = doc;
  bad_version["version"] = 99;
  EXPECT_THROW(network_from_json(bad_version), InvalidInput);
  json bad_format = doc;
  bad_format["format"] = "other";
  EXPECT_THROW(network_from_json(bad_format), InvalidInput);
  json bad_shape = doc;
  bad_shape["output"]["bias"] = json::array({1.0, 2.0});
  EXPECT_THROW(network_from_json(bad_shape), InvalidInput);
  EXPECT_THROW(network_from_json(json::object({{"format", "ratekit-model"}})), InvalidInput);
}

ImportanceReport small_report(int cls) {
  ImportanceReport r;
  r.cls = cls;
  r.items.push_back({"a", {}, 0.3, 0.75, 1, 0.2, true});
  r.items.push_back({"b", {}, 0.1, 0.25, -1, 0.05, false});
  return r;
}

TEST(ReportJson, FieldsAndClassAverage) {
  const json single = report_to_json({small_report(0)});
  ASSERT_EQ(single.size(), 2u);
  EXPECT_EQ(single[0]["name"], "a");
  EXPECT_EQ(single[0]["sign"], 1);
  EXPECT_FALSE(single[0].contains("class"));

  ImportanceReport other = small_report(1);
  other.items[0].rate = 0.25;
  other.items[1].rate = 0.75;
  const json multi = report_to_json({small_report(0), other});
  EXPECT_EQ(multi.size(), 4u);
  EXPECT_EQ(multi[2]["class"], 1);
  const auto rates = rates_from_report_json(multi);
  ASSERT_EQ(rates.size(), 2u);
  EXPECT_DOUBLE_EQ(rates[0], 0.5);
  EXPECT_DOUBLE_EQ(rates[1], 0.5);
}

TEST(ReportCsv, Header) {
  const std::string csv = report_to_csv({small_report(0)});
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "class,name,kld,rate,sign,mi,significant");
  EXPECT_NE(csv.find("0,a,0.29999999999999999,0.75,1,"), std::string::npos);
}

TEST(GroupsCsv, ParsesWithOptionalHeader) {
  const std::vector<std::string> names{"g1", "g2", "g3", "g4"};
  const GroupMap a = groups_from_csv("group,feature\nA,g1\nB,g3\nA,g2\n", names);
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a.names[0], "A");
  EXPECT_EQ(a.members[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(a.members[1], (std::vector<int>{2}));
  const GroupMap b = groups_from_csv("A,g4\nB,g1\n", names);
  EXPECT_EQ(b.members[0], (std::vector<int>{3}));
}

TEST(GroupsCsv, UnknownFeatureIsAnError) {
  EXPECT_THROW(groups_from_csv("A,g1\nB,missing\n", {"g1", "g2"}), InvalidInput);
  EXPECT_THROW(groups_from_csv("A,g1,extra\n", {"g1", "g2"}), InvalidInput);
  EXPECT_THROW(groups_from_csv("\n", {"g1"}), InvalidInput);
}

TEST(Files, WriteAndReadBack) {
  const auto dir = std::filesystem::temp_directory_path() / "ratekit_io_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_text(dir / "x.txt", "hello\n");
  EXPECT_EQ(read_text(dir / "x.txt"), "hello\n");
  EXPECT_THROW(read_text(dir / "missing.txt"), InvalidInput);
  std::filesystem::remove_all(dir.parent_path());
}

}  // namespace
}  // namespace ratekit::io
