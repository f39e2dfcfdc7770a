#include <gtest/gtest.h>

#include "flowguard/flow_model.hpp"
#include "support/oracles.hpp"

using namespace flowguard;

TEST(ValidateFlow, InRangeRecordIsOk) {
  EXPECT_TRUE(validate_flow(oracle::benign_flow()).ok());
}

TEST(ValidateFlow, SourcePortAboveRangeIsReported) {
  auto r = oracle::benign_flow();
  r.src_port = 70000;
  const auto v = validate_flow(r);
  EXPECT_FALSE(v.ok());
  EXPECT_TRUE(v.has("src_port"));
  EXPECT_EQ(v.violations.size(), 1u);
}

TEST(ValidateFlow, InvertedTtlOrderIsReported) {
  auto r = oracle::benign_flow();
  r.ip_min_ttl = 64;
  r.ip_max_ttl = 32;
  const auto v = validate_flow(r);
  EXPECT_TRUE(v.has("ip_min_ttl"));
}

TEST(ValidateFlow, EnumeratesEveryViolatedField) {
  auto r = oracle::benign_flow();
  r.duration = -1.0;
  r.tcp_rate = 1.5;
  r.pkt_asym = -1.01;
  r.l4_protocol = 300;
  r.tcp_stat = 0x100;  // wider than 8 bits
  r.per_ps = std::nan("");
  const auto v = validate_flow(r);
  for (const char* f : {"duration", "tcp_rate", "pkt_asym", "l4_protocol", "tcp_stat", "per_ps"}) {
    EXPECT_TRUE(v.has(f)) << f;
  }
  EXPECT_EQ(v.violations.size(), 6u);
}

TEST(ValidateFlow, RangeEndpointsAreAccepted) {
  auto r = oracle::benign_flow();
  r.src_port = 65535;
  r.dst_port = 0;
  r.tcp_rate = 1.0;
  r.tcp_ack_cnt_asym = -1.0;
  r.byt_asym = 1.0;
  r.ip_min_ttl = 255;
  r.ip_max_ttl = 255;
  r.tcp_aggr_anomaly = 0xFFFF;
  r.dst_port_class = PortClass::well_known;
  EXPECT_TRUE(validate_flow(r).ok());
}

TEST(ClassLabel, IntegerAndStringEncodingsAreBijective) {
  for (ClassLabel c : kAllClasses) {
    EXPECT_EQ(label_from_index(to_index(c)), c);
    EXPECT_EQ(label_from_string(to_string(c)), c);
  }
  EXPECT_FALSE(label_from_index(3).has_value());
  EXPECT_FALSE(label_from_index(-1).has_value());
  EXPECT_FALSE(label_from_string("worm").has_value());
  EXPECT_EQ(label_from_alias("dos"), ClassLabel::dos_attack);
  EXPECT_EQ(label_from_alias("service"), ClassLabel::service_incident);
  EXPECT_EQ(label_from_alias("normal"), ClassLabel::normal_traffic);
}

TEST(PortClass, FollowsIanaRanges) {
  EXPECT_EQ(port_class_for(0), PortClass::well_known);
  EXPECT_EQ(port_class_for(1023), PortClass::well_known);
  EXPECT_EQ(port_class_for(1024), PortClass::registered);
  EXPECT_EQ(port_class_for(49151), PortClass::registered);
  EXPECT_EQ(port_class_for(49152), PortClass::dynamic);
  EXPECT_EQ(port_class_for(65535), PortClass::dynamic);
}

TEST(Ipv4, ParsesAndPrintsDottedQuads) {
  auto a = Ipv4::parse("192.168.1.5");
  ASSERT_TRUE(a);
  EXPECT_EQ(a->value, (192u << 24) | (168u << 16) | (1u << 8) | 5u);
  EXPECT_EQ(a->str(), "192.168.1.5");
  EXPECT_FALSE(Ipv4::parse("256.1.1.1"));
  EXPECT_FALSE(Ipv4::parse("1.2.3"));
  EXPECT_FALSE(Ipv4::parse("1.2.3.4.5"));
  EXPECT_FALSE(Ipv4::parse("a.b.c.d"));
}

TEST(Ipv4Prefix, MembershipRespectsPrefixLength) {
  auto p = Ipv4Prefix::parse("172.16.0.0/12");
  ASSERT_TRUE(p);
  EXPECT_TRUE(p->contains(*Ipv4::parse("172.31.255.255")));
  EXPECT_FALSE(p->contains(*Ipv4::parse("172.32.0.0")));
  auto all = Ipv4Prefix::parse("0.0.0.0/0");
  ASSERT_TRUE(all);
  EXPECT_TRUE(all->contains(*Ipv4::parse("8.8.8.8")));
  EXPECT_FALSE(Ipv4Prefix::parse("10.0.0.0/33"));
}

TEST(Dataset, MergeConcatenatesAndPreservesWeights) {
  Dataset a, b;
  FeatureVector fv;
  a.push_back(fv, ClassLabel::normal_traffic, 1.0);
  a.push_back(fv, ClassLabel::dos_attack, 1.0);
  b.provenance = Provenance::feedback_update;
  b.push_back(fv, ClassLabel::service_incident, 5.0 / 3.0);
  const auto m = merge_datasets({&a, &b});
  EXPECT_EQ(m.size(), a.size() + b.size());
  EXPECT_EQ(m.provenance, Provenance::merged);
  EXPECT_EQ(m.labels[2], ClassLabel::service_incident);
  EXPECT_DOUBLE_EQ(m.weights[2], 5.0 / 3.0);
  EXPECT_TRUE(m.consistent());
}

TEST(Dataset, ConsistencyRequiresPositiveWeightsAndAlignedColumns) {
  Dataset d;
  d.push_back(FeatureVector{}, ClassLabel::normal_traffic, 1.0);
  EXPECT_TRUE(d.consistent());
  d.weights[0] = 0.0;
  EXPECT_FALSE(d.consistent());
  d.weights[0] = 1.0;
  d.labels.push_back(ClassLabel::dos_attack);
  EXPECT_FALSE(d.consistent());
}
