#pragma once

namespace surfgen::mc {

extern const int kEdgeTable[256];
extern const int kTriTable[256][16];

}  // namespace surfgen::mc
