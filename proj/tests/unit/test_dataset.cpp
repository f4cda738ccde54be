#include <doctest.h>

#include <sstream>

#include "helpers.hpp"
#include "voe/errors.hpp"

using namespace voe;

namespace {

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const DataError& e) {
    return e.field();
  }
  return "<no error>";
}

const char* kThree =
    R"({"id":"r1","state":0,"prediction":1,"human_action":"0","condition":"without_explanation","features":{"x":[0.1,0.2]},"explanations":{"lime":[1.0]}}
{"id":"r2","state":1,"prediction":1,"human_action":"1","condition":"with_explanation","features":{"x":[0.3,0.4]},"explanations":{"lime":[2.0]}}
{"id":"r3","state":1,"prediction":0,"human_action":null,"condition":null,"features":{"x":[0.5,0.6]},"explanations":{"lime":[3.0]}}
)";

}  // namespace

TEST_CASE("JSONL with three lines gives three records") {
  std::istringstream in(kThree);
  const auto d = parse_jsonl(in);
  REQUIRE(d.size() == 3);
  CHECK(d[0].state == "0");
  CHECK(d[1].prediction == "1");
  CHECK(std::get<std::vector<double>>(d[1].features.at("x")) == std::vector<double>{0.3, 0.4});
  CHECK(d[0].condition == Condition::kWithoutExplanation);
  CHECK(d[1].condition == Condition::kWithExplanation);
  CHECK_FALSE(d[2].human_action.has_value());
  CHECK_FALSE(d[2].condition.has_value());
  CHECK(d.explanation_names() == std::vector<std::string>{"lime"});
  CHECK_FALSE(d.all_have_human_action());
  CHECK(d.any_has_condition());
}

TEST_CASE("JSONL parse errors carry the line number") {
  std::istringstream in("{\"id\":\"a\",\"state\":0,\"prediction\":0}\n{not json\n");
  try {
    parse_jsonl(in);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("unknown state label names the state field") {
  std::istringstream in(R"({"id":"a","state":"7","prediction":0})" "\n");
  DatasetSchema schema = DatasetSchema::for_task(DecisionTask::accuracy());
  CHECK(field_of([&] { parse_jsonl(in, schema); }) == "state");
}

TEST_CASE("CSV missing a required explanation names the column") {
  std::istringstream in("id,state,prediction,x.0,x.1\na,0,0,1.0,2.0\n");
  DatasetSchema schema;
  schema.required_explanations = {"lime"};
  CHECK(field_of([&] { parse_csv(in, schema); }) == "explanations.lime");
}

TEST_CASE("CSV layout: vectors, discrete columns and empty cells") {
  std::istringstream in(
      "id,state,prediction,human_action,condition,x.0,x.1,z.lime.0,z.shap,g\n"
      "a,0,1,0,with_explanation,1.5,2.5,0.1,k3,u\n"
      "b,1,0,,,3.5,4.5,0.2,k1,v\n");
  const auto d = parse_csv(in);
  REQUIRE(d.size() == 2);
  CHECK(std::get<std::vector<double>>(d[0].features.at("x")) == std::vector<double>{1.5, 2.5});
  CHECK(std::get<std::vector<double>>(d[1].explanations.at("lime")) == std::vector<double>{0.2});
  CHECK(std::get<std::string>(d[0].explanations.at("shap")) == "k3");
  CHECK(std::get<std::string>(d[1].features.at("g")) == "v");
  CHECK(d[0].human_action == "0");
  CHECK_FALSE(d[1].human_action.has_value());
  CHECK_FALSE(d[1].condition.has_value());
}

TEST_CASE("vector dimension mismatch is rejected") {
  std::istringstream in(
      R"({"id":"a","state":0,"prediction":0,"features":{"x":[1,2]}})" "\n"
      R"({"id":"b","state":0,"prediction":0,"features":{"x":[1,2,3]}})" "\n");
  CHECK(field_of([&] { parse_jsonl(in); }) == "features.x");
}

TEST_CASE("mixing vector and discrete values in one column is rejected") {
  std::vector<EvaluationRecord> recs(2);
  recs[0].state = recs[1].state = "0";
  recs[0].features["x"] = std::vector<double>{1.0};
  recs[1].features["x"] = std::string("c");
  CHECK(field_of([&] { EvaluationDataset d(recs); }) == "features.x");
}

TEST_CASE("schema checks human actions and conditions") {
  std::istringstream in(kThree);
  const auto d = parse_jsonl(in);
  DatasetSchema s;
  s.require_human_action = true;
  CHECK(field_of([&] { d.validate(s); }) == "human_action");
  s = {};
  s.require_condition = true;
  CHECK(field_of([&] { d.validate(s); }) == "condition");
  s = {};
  s.required_features = {"x_ai"};
  CHECK(field_of([&] { d.validate(s); }) == "features.x_ai");
  s = DatasetSchema::for_task(DecisionTask::medical());
  CHECK(field_of([&] { d.validate(s); }) == "human_action");
}

TEST_CASE("condition labels") {
  CHECK(condition_from_string("with_explanation") == Condition::kWithExplanation);
  CHECK(to_string(Condition::kWithoutExplanation) == "without_explanation");
  CHECK_THROWS_AS(condition_from_string("maybe"), DataError);
}

TEST_CASE("JSONL write and read round-trip") {
  std::istringstream in(kThree);
  const auto d = parse_jsonl(in);
  std::ostringstream out;
  write_jsonl(out, d);
  std::istringstream again(out.str());
  const auto d2 = parse_jsonl(again);
  REQUIRE(d2.size() == d.size());
  std::ostringstream out2;
  write_jsonl(out2, d2);
  CHECK(out.str() == out2.str());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d2[i].id == d[i].id);
    CHECK(d2[i].features == d[i].features);
    CHECK(d2[i].explanations == d[i].explanations);
    CHECK(d2[i].human_action == d[i].human_action);
    CHECK(d2[i].condition == d[i].condition);
  }
}

TEST_CASE("load_dataset picks the format from the extension") {
  const auto csv = load_dataset(test::fixture("behavioral-two-arm.csv"));
  CHECK(csv.size() == 12);
  CHECK(csv[0].arm == "heatmap");
  const auto jsonl = load_dataset(test::fixture("adversarial-unique.jsonl"));
  CHECK(jsonl.size() == 200);
  CHECK_THROWS_AS(load_dataset(test::fixture("does-not-exist.jsonl")), DataError);
}
