// Copyright 2026 The dgrid Authors
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

// dgrid-sched --shape 4x4 --src "<map>" --dst "<map>"
// Prints the redistribution schedule as CSV.

#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "dgrid/error.hpp"
#include "dgrid/ndarray.hpp"
#include "dgrid/pitfalls.hpp"

namespace {

dgrid::Shape parse_shape(const std::string& text) {
  dgrid::Shape shape;
  std::istringstream is(text);
  for (std::string part; std::getline(is, part, 'x');) {
    std::size_t used = 0;
    long long v = -1;
    try {
      v = std::stoll(part, &used);
    } catch (const std::exception&) {
    }
    if (used != part.size() || v < 0)
      throw dgrid::ShapeError("bad shape '" + text + "'");
    shape.push_back(v);
  }
  if (shape.empty())
    throw dgrid::ShapeError("bad shape '" + text + "'");
  return shape;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Print the transfer table between two maps"};
  std::string shape_text, src, dst;
  bool summary = false;
  app.add_option("--shape", shape_text, "global shape, e.g. 4x4")->required();
  app.add_option("--src", src, "source map literal")->required();
  app.add_option("--dst", dst, "destination map literal")->required();
  app.add_flag("--summary", summary, "append message and pair counts to stderr");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto shape = parse_shape(shape_text);
    const auto sched = dgrid::compute_schedule(shape, dgrid::Map::parse(src), dgrid::Map::parse(dst));
    std::cout << dgrid::schedule_to_csv(sched);
    if (summary)
      std::cerr << "messages=" << dgrid::schedule_message_count(sched)
                << " pairs=" << dgrid::schedule_pair_count(sched) << "\n";
  } catch (const dgrid::Error& e) {
    std::cerr << "dgrid-sched: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
