#pragma once
// Generated by generate_oracles.py; do not edit by hand.

namespace oracle {
inline constexpr double kShrinkI1 = 1.351021717712079926;
inline constexpr double kShrinkJ1 = 0.64897828228792007397;
inline constexpr double kShrinkLPiOver4 = 1.1055588590329814195;
inline constexpr double kShrinkEllPiOver4 = 0.55277942951649070977;
inline constexpr double kShrinkEllPole = 0.32448914114396003698;
inline constexpr double kShrinkKHPole = -0.34217752552270662968;
inline constexpr double kShrinkHarnackV0 = -0.22222222222222222222;
inline constexpr double kShrinkHarnackV1 = 0.44444444444444444444;
inline constexpr double kSigmaInvHalfAtOne = 0.6321205588285576784;
inline constexpr double kExtinctionK03 = 0.59445823989788729819;
inline constexpr double kStepSupD1Q34 = 11.763545837668038655;
inline constexpr double kStepSupD2Q34 = 1387.0320068281000546;
inline constexpr double kStepSupD1Q12 = 4.2397644770785359646;
}  // namespace oracle
