#pragma once

namespace shapetweak {

// Every parallel kernel keeps a serial twin that produces identical results.
enum class Execution { serial, parallel };

}  // namespace shapetweak
