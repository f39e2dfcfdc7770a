#include <gtest/gtest.h>

#include <cctype>

#include "flowguard/errors.hpp"
#include "flowguard/flow_csv.hpp"
#include "flowguard/etl.hpp"
#include "flowguard/report.hpp"

using namespace flowguard;

namespace {

// Minimal XML well-formedness check: balanced, properly nested tags, quoted
// attributes, and only the five predefined entities or numeric references.
bool well_formed(const std::string& doc, std::string* why) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  auto fail = [&](const std::string& msg) {
    *why = msg + " at offset " + std::to_string(i);
    return false;
  };
  while (i < doc.size()) {
    const char c = doc[i];
    if (c == '&') {
      const auto semi = doc.find(';', i);
      if (semi == std::string::npos) return fail("unterminated entity");
      const auto ent = doc.substr(i + 1, semi - i - 1);
      const bool ok = ent == "amp" || ent == "lt" || ent == "gt" || ent == "quot" || ent == "apos" ||
                      (ent.size() > 1 && ent[0] == '#');
      if (!ok) return fail("unknown entity &" + ent + ";");
      i = semi + 1;
      continue;
    }
    if (c != '<') {
      ++i;
      continue;
    }
    const auto close = doc.find('>', i);
    if (close == std::string::npos) return fail("unterminated tag");
    std::string tag = doc.substr(i + 1, close - i - 1);
    if (tag.rfind("!DOCTYPE", 0) == 0) {
      if (i != 0) return fail("DOCTYPE not at start");
    } else if (!tag.empty() && tag[0] == '/') {
      const auto name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return fail("mismatched </" + name + ">");
      stack.pop_back();
    } else {
      const bool self_closing = !tag.empty() && tag.back() == '/';
      if (self_closing) tag.pop_back();
      std::size_t n = 0;
      while (n < tag.size() && std::isalnum(static_cast<unsigned char>(tag[n]))) ++n;
      if (n == 0) return fail("empty tag name");
      // attributes must be name="value"
      std::size_t q = 0;
      for (char ch : tag.substr(n)) q += ch == '"';
      if (q % 2) return fail("unbalanced attribute quotes");
      if (!self_closing) stack.push_back(tag.substr(0, n));
    }
    i = close + 1;
  }
  if (!stack.empty()) {
    *why = "unclosed <" + stack.back() + ">";
    return false;
  }
  return true;
}

ReportMetadata meta() {
  return {"INC-000042", *parse_utc("2026-05-06T07:08:09Z"), {11, 12, 13}, "0123456789abcdef0123"};
}

IncidentReport make(double n, double s, double d) {
  const auto dist = ClassDistribution::from_probabilities({n, s, d});
  const auto kb = default_knowledge_base();
  return generate_report(dist, suggest(dist, kb, 5), kb, meta());
}

}  // namespace

TEST(Report, CertainNormalHasSingleCauseAndNoActionSummary) {
  const auto r = make(1, 0, 0);
  ASSERT_EQ(r.probable_causes.size(), 1u);
  EXPECT_EQ(r.probable_causes[0].label, ClassLabel::normal_traffic);
  EXPECT_NE(r.management_summary.find("No action required"), std::string::npos);
}

TEST(Report, CertainDosListsDosCauseFirstWithMeasures) {
  const auto r = make(0, 0, 1);
  ASSERT_FALSE(r.probable_causes.empty());
  EXPECT_EQ(r.probable_causes[0].label, ClassLabel::dos_attack);
  std::vector<std::string> ids;
  for (const auto& s : r.recommendations) ids.push_back(s.entry.recommendation_id);
  EXPECT_NE(std::find(ids.begin(), ids.end(), "dos-blacklist"), ids.end());
  EXPECT_NE(std::find(ids.begin(), ids.end(), "dos-notify-provider"), ids.end());
}

TEST(Report, CausesCopyDistributionAndAreOrdered) {
  const auto r = make(0.25, 0.005, 0.745);
  ASSERT_EQ(r.probable_causes.size(), 2u);  // 0.005 is below the narrative threshold
  EXPECT_EQ(r.probable_causes[0].label, ClassLabel::dos_attack);
  EXPECT_EQ(r.probable_causes[0].probability, 0.745);
  EXPECT_EQ(r.probable_causes[1].probability, 0.25);
  EXPECT_EQ(r.distribution.p, (std::array<double, 3>{0.25, 0.005, 0.745}));
  double sum = 0.0;
  for (double p : r.distribution.p) sum += p;
  EXPECT_NEAR(sum, 1.0, 1e-9);
  EXPECT_EQ(r.flows_covered, (std::vector<std::int64_t>{11, 12, 13}));
  EXPECT_EQ(r.kb_version, default_knowledge_base().version);
}

TEST(Report, SummaryAvoidsAttributeNames) {
  std::vector<std::string> names;
  for (auto h : flow_csv_columns()) names.emplace_back(h);
  for (const auto& n : MetricsCollection::defaults().feature_names()) names.push_back(n);
  for (const auto& r : {make(1, 0, 0), make(0, 1, 0), make(0, 0, 1), make(0.3, 0.4, 0.3)}) {
    for (const auto& n : names) {
      if (n == "Label" || n == "Weight") continue;
      EXPECT_EQ(r.management_summary.find(n), std::string::npos) << n << " in: " << r.management_summary;
    }
  }
}

TEST(Report, StructuredTextRoundTrip) {
  for (const auto& r : {make(1, 0, 0), make(0.2, 0.3, 0.5), make(0.01, 0.98, 0.01)}) {
    const auto text = render(r, ReportFormat::structured_text);
    EXPECT_EQ(parse_structured_report(text), r);
  }
}

TEST(Report, HtmlIsWellFormedAndShowsProbabilities) {
  const auto r = make(0.125, 0.25, 0.625);
  const auto html = render(r, ReportFormat::html);
  std::string why;
  EXPECT_TRUE(well_formed(html, &why)) << why;
  for (const char* p : {"12.50 %", "25.00 %", "62.50 %"}) EXPECT_NE(html.find(p), std::string::npos) << p;
  for (const auto& s : r.recommendations) {
    EXPECT_NE(html.find(s.entry.title), std::string::npos) << s.entry.title;
  }
}

TEST(Report, HtmlEscapesMarkup) {
  auto r = make(0, 1, 0);
  r.incident_id = "INC-<b>&\"x\"";
  r.management_summary = "a < b & c > d";
  const auto html = render(r, ReportFormat::html);
  std::string why;
  EXPECT_TRUE(well_formed(html, &why)) << why;
  EXPECT_EQ(html.find("<b>"), std::string::npos);
}

TEST(Report, RenderingIsDeterministic) {
  const auto r = make(0.3, 0.3, 0.4);
  EXPECT_EQ(render(r, ReportFormat::html), render(r, ReportFormat::html));
  EXPECT_EQ(render(r, "structured_text"), render(r, "json"));
}

TEST(Report, UnknownFormatIsRejected) {
  EXPECT_THROW(render(make(1, 0, 0), "pdf"), ValidationError);
}

TEST(Report, CheckerRejectsBrokenMarkup) {
  std::string why;
  EXPECT_FALSE(well_formed("<p><b>x</p></b>", &why));
  EXPECT_FALSE(well_formed("<p>a & b</p>", &why));
  EXPECT_FALSE(well_formed("<p>", &why));
  EXPECT_TRUE(well_formed("<p>a &amp; b<br /></p>", &why));
}
