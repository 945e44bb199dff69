// Copyright 2026 The aphasiakit authors
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

#include <benchmark/benchmark.h>

#include <string>

#include "aphasia/chat.hpp"

namespace {

using namespace aphasia;

std::string make_transcript(int utterances) {
  std::string text = "@Participants:\tPAR Participant, INV Investigator\n";
  const char* lines[] = {
      "*PAR:\t<I want> [/] I want &-um coffee . \xE2\x80\xA2" "100_900\xE2\x80\xA2\n",
      "*PAR:\t&=laughs that was funny [x 2] . \xE2\x80\xA2" "900_1500\xE2\x80\xA2\n",
      "*INV:\twhat [% soft] about this [= picture] one ? \xE2\x80\xA2" "1500_2000\xE2\x80\xA2\n",
      "*PAR:\txxx (.) yyy . \xE2\x80\xA2" "2000_2300\xE2\x80\xA2\n",
  };
  for (int i = 0; i < utterances; ++i) text += lines[i % 4];
  return text;
}

void BM_parse_chat(benchmark::State& state) {
  const std::string text = make_transcript(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(chat::parse_chat(text));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(text.size()));
}
BENCHMARK(BM_parse_chat)->Arg(100)->Arg(1000);

void BM_clean_document(benchmark::State& state) {
  const auto doc = chat::parse_chat(make_transcript(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    benchmark::DoNotOptimize(chat::clean_document(doc));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          static_cast<std::int64_t>(doc.utterances.size()));
}
BENCHMARK(BM_clean_document)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
