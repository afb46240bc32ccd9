/* Copyright 2026 The Playseg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PLAYSEG_TEXT_H_
#define PLAYSEG_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace playseg {

std::string ToLower(std::string_view s);
std::string Trim(std::string_view s);

// Lowercase, trim, collapse internal whitespace runs to one space, drop one
// trailing period.
std::string NormalizeText(std::string_view s);

// Splits on `sep`; keeps empty fields.
std::vector<std::string> Split(std::string_view s, char sep);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);

bool StartsWith(std::string_view s, std::string_view prefix);
bool EndsWith(std::string_view s, std::string_view suffix);

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double v);

}  // namespace playseg

#endif  // PLAYSEG_TEXT_H_
