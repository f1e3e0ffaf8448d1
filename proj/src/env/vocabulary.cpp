#include "rnav/env/vocabulary.hpp"

namespace rnav::env {
namespace {

constexpr std::array<std::string_view, Vocabulary::kSize> kWords = {
    "<pad>",    "<unk>",     "go",         "to",         "the",       "turn",     "stop",      "at",
    "and",      "then",      "walk",       "straight",   "slightly-left", "left", "sharp-left", "around",
    "sharp-right", "right",  "slightly-right",
    // landmarks
    "kitchen",  "sofa",      "stairs",     "door",       "window",    "table",    "bed",       "plant",
    "lamp",     "mirror",    "sink",       "fridge",     "tv",        "desk",     "chair",     "rug",
    "painting", "bookshelf", "fireplace",  "bathtub",
    // synonyms
    "cooker",   "couch",     "steps",      "doorway",    "pane",      "counter",  "bunk",      "fern",
    "light",    "glass",     "basin",      "icebox",     "television", "workbench", "seat",    "carpet",
    "picture",  "shelves",   "hearth",     "tub",
    // fillers
    "now",      "please",    "slowly",     "next",       "carefully"};

}  // namespace

std::string_view Vocabulary::word(int token) {
  if (token < 0 || token >= kSize) return "<invalid>";
  return kWords[static_cast<std::size_t>(token)];
}

}  // namespace rnav::env
