#pragma once

// (curve, point) pairs shared by the height tests and the acceptance run.

#include "qortho/curve.hpp"

#include <vector>

namespace testing {

using qortho::CurvePoint;
using qortho::EllipticCurve;
using qortho::Integer;

struct CorpusEntry {
    EllipticCurve curve;
    CurvePoint point;
};

// Curves and points covering good, multiplicative and additive reduction,
// including points with singular reduction in both bad cases.
std::vector<CorpusEntry> height_corpus()
{
    return {
        {EllipticCurve(0, 0, 0, 0, 17), CurvePoint(-2, 3)},
        {EllipticCurve(0, 0, 0, 0, 17), CurvePoint(-1, 4)},
        {EllipticCurve(0, 0, 0, 0, 17), CurvePoint(4, -9)},
        {EllipticCurve(0, 0, 0, 0, -2), CurvePoint(3, 5)},
        {EllipticCurve(0, 0, 0, 0, 2), CurvePoint(-1, 1)},
        {EllipticCurve(0, 0, 0, 0, -11), CurvePoint(3, 4)},
        {EllipticCurve(0, 0, 0, 0, Integer(17) * 46656), CurvePoint(-72, 648)}, // non-minimal
        {EllipticCurve(0, 0, 1, -1, 0), CurvePoint(0, 0)},
        {EllipticCurve(0, 1, 1, -2, 0), CurvePoint(-1, 1)},
        {EllipticCurve(0, 1, 1, -2, 0), CurvePoint(0, 0)},
        {EllipticCurve(0, 0, 1, -7, 6), CurvePoint(1, 0)},
        {EllipticCurve(0, 0, 0, -1, 1), CurvePoint(1, 1)},
        {EllipticCurve(0, -1, 0, -12, -11), CurvePoint(-2, 1)},
        {EllipticCurve(0, -1, 0, -12, -8), CurvePoint(-2, 2)},
        {EllipticCurve(0, -1, 0, -12, -8), CurvePoint(6, 10)},
        {EllipticCurve(0, -1, 0, -12, 1), CurvePoint(4, 1)},
        {EllipticCurve(0, -1, 0, -12, 9), CurvePoint(-3, 3)},
        {EllipticCurve(0, -1, 0, -11, -9), CurvePoint(5, 6)},
        {EllipticCurve(0, -1, 0, -11, 0), CurvePoint(11, 33)},
        {EllipticCurve(0, -1, 0, -11, 0), CurvePoint(-1, 3)},
        {EllipticCurve(1, 0, 0, 0, 1), CurvePoint(0, 1)},
        {EllipticCurve(0, 0, 0, -43, 166), CurvePoint(3, 8)},
    };
}

}  // namespace testing
