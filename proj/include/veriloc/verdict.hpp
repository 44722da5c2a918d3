#pragma once

#include <string>

namespace veriloc {

/// Outcome of one integrity check on one epoch.
struct DetectionVerdict {
    std::string technique;
    bool valid = false;
    double diagnostic = 0.0;  // angle error (deg), position discrepancy (m), NIS, ...
    std::string reason;       // set when invalid for a non-threshold cause
};

}  // namespace veriloc
