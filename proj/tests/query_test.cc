// Copyright 2026 The qref Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qref/query.h"

#include <gtest/gtest.h>

#include "test_util.h"

namespace qref {
namespace {

TEST(ParseQueryTest, ScholarshipQuery) {
  Query q = testing::scholarship_query();
  EXPECT_TRUE(q.distinct);
  EXPECT_EQ(q.tables, (std::vector<std::string>{"Students", "Activities"}));
  EXPECT_EQ(q.select_attrs, (std::vector<std::string>{"ID", "Gender", "Income"}));
  ASSERT_EQ(q.numeric_preds.size(), 1u);
  EXPECT_EQ(q.numeric_preds[0].attribute, "GPA");
  EXPECT_EQ(q.numeric_preds[0].op, CmpOp::kGe);
  EXPECT_EQ(q.numeric_preds[0].constant, Decimal::parse("3.7"));
  ASSERT_EQ(q.cat_preds.size(), 1u);
  EXPECT_EQ(q.cat_preds[0].values, (std::set<std::string>{"RB"}));
  EXPECT_EQ(q.order_by.attribute, "SAT");
  EXPECT_TRUE(q.order_by.descending);
}

TEST(ParseQueryTest, DisjunctionOverOneAttributeIsOneCategoricalPredicate) {
  Query q = parse_query(
      "SELECT * FROM R WHERE (Activity = 'RB' OR Activity = 'SO') AND \"Space Walks\" <= 3 "
      "ORDER BY \"Space Flight (hrs)\"");
  ASSERT_EQ(q.cat_preds.size(), 1u);
  EXPECT_EQ(q.cat_preds[0].values, (std::set<std::string>{"RB", "SO"}));
  EXPECT_EQ(q.numeric_preds[0].attribute, "Space Walks");
  EXPECT_EQ(q.order_by.attribute, "Space Flight (hrs)");
  EXPECT_FALSE(q.order_by.descending);
}

TEST(ParseQueryTest, UnparenthesizedSingleAttributeOr) {
  Query q = parse_query("SELECT * FROM Items WHERE Y = 'C' OR Y = 'D' ORDER BY Z DESC");
  EXPECT_EQ(q.cat_preds[0].values, (std::set<std::string>{"C", "D"}));
}

TEST(ParseQueryTest, RejectsUnsupportedConstructs) {
  const char* unsupported[] = {
      "SELECT * FROM R WHERE A = 'x' OR B = 'y' ORDER BY S",
      "SELECT * FROM R WHERE A = 'x' ORDER BY S UNION SELECT * FROM T ORDER BY S",
      "SELECT * FROM R WHERE A IN (SELECT A FROM T) ORDER BY S",
      "SELECT * FROM R WHERE NOT A = 'x' ORDER BY S",
      "SELECT * FROM R ORDER BY S LIMIT 5",
      "SELECT * FROM R, T ORDER BY S",
      "SELECT * FROM R JOIN T ON R.a = T.a ORDER BY S",
      "SELECT * FROM R WHERE A <> 'x' ORDER BY S",
      "SELECT * FROM R WHERE A LIKE 'x%' ORDER BY S",
      "SELECT * FROM R ORDER BY S + T",
      "SELECT * FROM R GROUP BY A ORDER BY S",
  };
  for (const char* text : unsupported) {
    EXPECT_THROW(parse_query(text), UnsupportedQueryError) << text;
  }
}

TEST(ParseQueryTest, RejectsMalformedText) {
  for (const char* text : {"SELECT FROM R", "SELECT * FROM R WHERE A >= ORDER BY S",
                           "SELECT * FROM R WHERE A = 'x", "SELECT * FROM R ORDER S"}) {
    EXPECT_THROW(parse_query(text), QuerySyntaxError) << text;
  }
}

TEST(RenderSqlTest, RoundTripsThroughParser) {
  Query q = parse_query(
      "SELECT DISTINCT ID FROM Students NATURAL JOIN Activities "
      "WHERE GPA >= 3.7 AND (Activity = 'RB' OR Activity = 'SO') AND \"Odd Name\" < -2.5 "
      "ORDER BY SAT DESC");
  EXPECT_EQ(parse_query(render_sql(q)), q);
}

TEST(ApplyRefinementTest, ReplacesConstantsAndSets) {
  Query q = testing::scholarship_query();
  Refinement r;
  r.numeric_constants[{"GPA", CmpOp::kGe}] = Decimal::parse("3.6");
  r.cat_values["Activity"] = {"RB", "GD"};
  Query q2 = apply_refinement(q, r);
  EXPECT_EQ(q2.numeric_preds[0].constant, Decimal::parse("3.6"));
  EXPECT_EQ(q2.cat_preds[0].values, (std::set<std::string>{"GD", "RB"}));
  EXPECT_EQ(q2.order_by, q.order_by);

  Refinement bad;
  bad.cat_values["Activity"] = {};
  EXPECT_THROW(apply_refinement(q, bad), RefinementError);
  Refinement missing;
  missing.cat_values["Gender"] = {"F"};
  EXPECT_THROW(apply_refinement(q, missing), RefinementError);
}

TEST(ValidateQueryTest, ChecksAttributesAndKinds) {
  Database db = testing::running_example();
  Relation j = natural_join(db.at("Students"), db.at("Activities"));
  validate_query(testing::scholarship_query(), j.schema);
  EXPECT_THROW(validate_query(parse_query("SELECT * FROM S WHERE Major = 'x' ORDER BY SAT"), j.schema),
               SchemaError);
  EXPECT_THROW(validate_query(parse_query("SELECT * FROM S WHERE GPA = 'x' ORDER BY SAT"), j.schema),
               TypeError);
  EXPECT_THROW(validate_query(parse_query("SELECT * FROM S WHERE Gender >= 2 ORDER BY SAT"), j.schema),
               TypeError);
}

}  // namespace
}  // namespace qref
