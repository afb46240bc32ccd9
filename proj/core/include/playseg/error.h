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

#ifndef PLAYSEG_ERROR_H_
#define PLAYSEG_ERROR_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace playseg {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (stream lines, scripts, configs, artifact files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int64_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int64_t line() const { return line_; }

 private:
  int64_t line_;
};

// A declared invariant does not hold. `field` names the offending field.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& what,
                  int64_t frame_index = -1)
      : Error(Format(field, what, frame_index)),
        field_(field),
        frame_index_(frame_index) {}
  const std::string& field() const { return field_; }
  int64_t frame_index() const { return frame_index_; }

 private:
  static std::string Format(const std::string& field, const std::string& what,
                            int64_t frame_index) {
    std::string out = field + ": " + what;
    if (frame_index >= 0) out += " (frame " + std::to_string(frame_index) + ")";
    return out;
  }
  std::string field_;
  int64_t frame_index_;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

// Geometric degeneracy: collinear points, singular systems, points at infinity.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// The language model client failed after exhausting its retry budget.
class ClientError : public Error {
 public:
  using Error::Error;
};

// A model reply could not be interpreted. Carries the raw payload.
class ResponseError : public Error {
 public:
  ResponseError(const std::string& what, std::string raw)
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Precondition of a labeling operation not met (e.g. nothing to label).
class LabelError : public Error {
 public:
  using Error::Error;
};

}  // namespace playseg

#endif  // PLAYSEG_ERROR_H_
