// Copyright 2026 The Authors.
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

#ifndef MOSAIC_DOCUMENT_H_
#define MOSAIC_DOCUMENT_H_

#include <cstdint>
#include <vector>

namespace mosaic {

using Token = std::uint32_t;
using TokenSeq = std::vector<Token>;
using DocId = std::uint32_t;

// (subject, relation, object); objects may span several tokens.
struct Triple {
  Token subject = 0;
  Token relation = 0;
  TokenSeq object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

struct Document {
  DocId doc_id = 0;
  std::uint32_t topic = 0;
  TokenSeq tokens;
  std::vector<Triple> triples;

  friend bool operator==(const Document&, const Document&) = default;
};

struct Query {
  std::uint32_t query_id = 0;
  DocId doc_id = 0;  // first document stating the answering triple
  TokenSeq tokens;
  TokenSeq answer;

  friend bool operator==(const Query&, const Query&) = default;
};

}  // namespace mosaic

#endif  // MOSAIC_DOCUMENT_H_
