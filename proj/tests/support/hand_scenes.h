// Copyright 2026 The NMN-CL Authors.
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

#ifndef NMN_TESTS_SUPPORT_HAND_SCENES_H_
#define NMN_TESTS_SUPPORT_HAND_SCENES_H_

// Small scenes with answers and per-step targets worked out by hand.

#include <map>
#include <string>
#include <vector>

#include "synth/scene.h"

namespace nmn::testing {

inline SceneObject HandObject(std::string name, std::string color, std::string size,
                              std::string material, int x, int y) {
  return SceneObject{std::move(name),
                     {{"color", std::move(color)},
                      {"size", std::move(size)},
                      {"material", std::move(material)}},
                     x,
                     y};
}

// red cat at (0,0), blue dog at (1,0).
inline SceneGraph TwoObjectScene() {
  SceneGraph g;
  g.columns = 2;
  g.rows = 1;
  g.objects = {HandObject("cat", "red", "small", "metal", 0, 0),
               HandObject("dog", "blue", "large", "wood", 1, 0)};
  return g;
}

// 0: red small wood cat (0,0); 1: red large metal dog (1,0);
// 2: blue large wood cat (0,1).
inline SceneGraph ThreeObjectScene() {
  SceneGraph g;
  g.columns = 2;
  g.rows = 2;
  g.objects = {HandObject("cat", "red", "small", "wood", 0, 0),
               HandObject("dog", "red", "large", "metal", 1, 0),
               HandObject("cat", "blue", "large", "wood", 0, 1)};
  return g;
}

// 0: green large wood horse (0,0); 1: yellow small metal bird (1,0);
// 2: green small wood tree (2,0).
inline SceneGraph RowScene() {
  SceneGraph g;
  g.columns = 3;
  g.rows = 1;
  g.objects = {HandObject("horse", "green", "large", "wood", 0, 0),
               HandObject("bird", "yellow", "small", "metal", 1, 0),
               HandObject("tree", "green", "small", "wood", 2, 0)};
  return g;
}

struct HandCase {
  int scene;  // 0 two-object, 1 three-object, 2 row
  std::string program;
  std::string answer;
  // step -> target values; one entry means a boolean target.
  std::map<int, std::vector<double>> targets;
};

inline SceneGraph HandScene(int index) {
  switch (index) {
    case 0: return TwoObjectScene();
    case 1: return ThreeObjectScene();
    default: return RowScene();
  }
}

inline const std::vector<HandCase> &HandCases() {
  static const std::vector<HandCase> cases = {
      {0, "select[cat];query_attr[color](a0)", "red", {{0, {1, 0}}}},
      {0, "select[cat];select[dog];different[color](a0,a1);answer_logic(b0)", "yes",
       {{0, {1, 0}}, {1, {0, 1}}, {2, {1}}}},
      {0, "select[horse];exist(a0);answer_logic(b0)", "no", {{1, {0}}}},
      {0, "select[dog];relate_sub[left of](a0);query_name(a1)", "cat", {{0, {0, 1}}, {1, {1, 0}}}},

      {1, "select[dog];query_name(a0)", "dog", {{0, {0, 1, 0}}}},
      {1, "select[cat];filter_attr[blue](a0);query_attr[size](a1)", "large",
       {{0, {1, 0, 1}}, {1, {0, 0, 1}}}},
      {1, "select[cat];filter_not[blue](a0);query_pos(a1)", "left",
       {{0, {1, 0, 1}}, {1, {1, 0, 0}}}},
      {1, "select[cat];filter_pos[right](a0);exist(a1);answer_logic(b0)", "no",
       {{0, {1, 0, 1}}, {2, {0}}}},
      {1, "select[dog];relate_sub[left of](a0);filter_attr[blue](a1);query_name(a2)", "cat",
       {{0, {0, 1, 0}}, {1, {1, 0, 1}}, {2, {0, 0, 1}}}},
      {1, "select[cat];relate_obj[left of](a0);query_name(a1)", "dog",
       {{0, {1, 0, 1}}, {1, {0, 1, 0}}}},
      {1, "select[dog];relate_attr[color](a0);query_name(a1)", "cat",
       {{0, {0, 1, 0}}, {1, {1, 0, 0}}}},
      {1, "select[cat];select[dog];relate_attr[color](a1);fusion(a0,a2);query_attr[material](a3)",
       "wood", {{0, {1, 0, 1}}, {1, {0, 1, 0}}, {2, {1, 0, 0}}, {3, {1, 0, 0}}}},
      {1, "select[cat];exist(a0);select[horse];exist(a1);and(b0,b1);answer_logic(b2)", "no",
       {{0, {1, 0, 1}}, {1, {1}}, {3, {0}}, {4, {0}}}},
      {1, "select[cat];exist(a0);select[horse];exist(a1);or(b0,b1);answer_logic(b2)", "yes",
       {{0, {1, 0, 1}}, {1, {1}}, {3, {0}}, {4, {1}}}},
      {1, "select[dog];select[cat];filter_attr[small](a1);same[color](a0,a2);answer_logic(b0)",
       "yes", {{0, {0, 1, 0}}, {1, {1, 0, 1}}, {2, {1, 0, 0}}, {3, {1}}}},
      {1, "select[dog];select[cat];filter_attr[small](a1);different[size](a0,a2);answer_logic(b0)",
       "yes", {{0, {0, 1, 0}}, {1, {1, 0, 1}}, {2, {1, 0, 0}}, {3, {1}}}},
      {1, "select[cat];same_all[color](a0);answer_logic(b0)", "no", {{0, {1, 0, 1}}, {1, {0}}}},
      {1, "select[cat];different_all[material](a0);answer_logic(b0)", "no",
       {{0, {1, 0, 1}}, {1, {0}}}},
      {1, "select[cat];filter_attr[small](a0);select[dog];verify_rel_sub[left of](a1,a2);"
          "answer_logic(b0)",
       "yes", {{0, {1, 0, 1}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}, {3, {1}}}},
      {1, "select[cat];filter_attr[small](a0);select[dog];verify_rel_obj[left of](a1,a2);"
          "answer_logic(b0)",
       "no", {{0, {1, 0, 1}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}, {3, {0}}}},
      {1, "select[dog];verify_attr[red](a0);answer_logic(b0)", "yes", {{0, {0, 1, 0}}, {1, {1}}}},
      {1, "select[dog];verify_pos[right](a0);answer_logic(b0)", "yes", {{0, {0, 1, 0}}, {1, {1}}}},
      {1, "select[cat];relate_obj[left of](a0);choose_name[dog,horse](a1)", "dog",
       {{0, {1, 0, 1}}, {1, {0, 1, 0}}}},
      {1, "select[cat];filter_attr[small](a0);choose_attr[red,blue](a1)", "red",
       {{0, {1, 0, 1}}, {1, {1, 0, 0}}}},
      {1, "select[cat];filter_attr[small](a0);select[dog];compare[large](a1,a2)", "dog",
       {{0, {1, 0, 1}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}}},
      {1, "select[dog];choose_pos[left,right](a0)", "right", {{0, {0, 1, 0}}}},
      {1, "select[cat];filter_attr[small](a0);select[dog];choose_rel[left of,right of](a1,a2)",
       "left of", {{0, {1, 0, 1}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}}},
      {1, "select[cat];filter_attr[small](a0);select[dog];common(a1,a2)", "red",
       {{0, {1, 0, 1}}, {1, {1, 0, 0}}, {2, {0, 1, 0}}}},
      {1, "select[cat];relate_sub[below](a0);exist(a1);answer_logic(b0)", "no",
       {{0, {1, 0, 1}}, {2, {0}}}},

      {2, "select[bird];relate_sub[left of](a0);query_name(a1)", "horse",
       {{0, {0, 1, 0}}, {1, {1, 0, 0}}}},
      {2, "select[bird];relate_obj[left of](a0);query_name(a1)", "tree",
       {{0, {0, 1, 0}}, {1, {0, 0, 1}}}},
      {2, "select[horse];relate_attr[color](a0);query_pos(a1)", "right",
       {{0, {1, 0, 0}}, {1, {0, 0, 1}}}},
      {2, "select[bird];select[tree];common(a0,a1)", "small", {{0, {0, 1, 0}}, {1, {0, 0, 1}}}},
      {2, "select[bird];query_attr(a0)", "yellow", {{0, {0, 1, 0}}}},
      {2, "select[bird];choose_pos[left,middle](a0)", "middle", {{0, {0, 1, 0}}}},
      {2, "select[tree];select[horse];fusion(a0,a1);exist(a2);answer_logic(b0)", "no",
       {{0, {0, 0, 1}}, {1, {1, 0, 0}}, {3, {0}}}},
      {2, "select[horse];relate_sub[right of](a0);same_all[material](a1);answer_logic(b0)", "no",
       {{0, {1, 0, 0}}, {1, {0, 1, 1}}, {2, {0}}}},
  };
  return cases;
}

}  // namespace nmn::testing

#endif  // NMN_TESTS_SUPPORT_HAND_SCENES_H_
