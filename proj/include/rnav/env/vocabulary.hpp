#pragma once

#include <array>
#include <string_view>

namespace rnav::env {

enum class RelativeDirection { kStraight, kSlightLeft, kLeft, kSharpLeft, kAround, kSharpRight, kRight, kSlightRight };

// Fixed 64-token vocabulary of the templated instruction language.
//   0-1    <pad> <unk>
//   2-10   function words
//   11-18  relative directions
//   19-38  landmark names (one per landmark category)
//   39-58  landmark synonyms (only produced by the noisy regime)
//   59-63  filler words (only produced by the noisy regime)
struct Vocabulary {
  static constexpr int kSize = 64;
  static constexpr int kLandmarkCount = 20;

  static constexpr int kPad = 0;
  static constexpr int kUnknown = 1;
  static constexpr int kGo = 2;
  static constexpr int kTo = 3;
  static constexpr int kThe = 4;
  static constexpr int kTurn = 5;
  static constexpr int kStop = 6;
  static constexpr int kAt = 7;
  static constexpr int kAnd = 8;
  static constexpr int kThen = 9;
  static constexpr int kWalk = 10;
  static constexpr int kFirstDirection = 11;
  static constexpr int kFirstLandmark = 19;
  static constexpr int kFirstSynonym = 39;
  static constexpr int kFirstFiller = 59;
  static constexpr int kFillerCount = 5;

  static int direction_token(RelativeDirection d) { return kFirstDirection + static_cast<int>(d); }
  static int landmark_token(int landmark) { return kFirstLandmark + landmark; }
  static int synonym_token(int landmark) { return kFirstSynonym + landmark; }
  static bool is_landmark(int token) { return token >= kFirstLandmark && token < kFirstLandmark + kLandmarkCount; }
  static bool is_direction(int token) { return token >= kFirstDirection && token < kFirstLandmark; }

  static std::string_view word(int token);
};

}  // namespace rnav::env
