#pragma once

// Generated by tests/oracles/generate_oracles.py.

namespace oracle {

inline constexpr double kAbs2MaAt0p1 = 0.40066533460246939227;
inline constexpr double kPbAt0p1 = 0.59933466539753060773;
inline constexpr double kTwoLobePa = 0.48800729464613767865;
inline constexpr double kTwoLobePaPointLimit = 0.48800719870411108016;
inline constexpr double kGaussianLm2AtCentre = 109.0;
inline constexpr double kGaussianLm2OffCentre = 109.0;
inline constexpr double kGaussianJ = 3.0;
inline constexpr double kTwoLobeLocalMomentum = 5.0000000026017768919;
inline constexpr double kNarrowCount20 = 0.0020423585717009091772;
inline constexpr double kNarrowBinomial20 = 0.0020423549000810996279;
inline constexpr double kNarrowCount30 = 0.11455324380679189317;
inline constexpr double kNarrowBinomial30 = 0.11455327243457734399;
inline constexpr double kNarrowCount35 = 0.040973041328719357428;
inline constexpr double kNarrowBinomial35 = 0.040973029532347826631;
inline constexpr double kDefaultCount5000 = 0.0019350630749601289449;
inline constexpr double kDefaultCount5200 = 0.0012094232932336483464;
inline constexpr double kRecordAbbProbability = 0.13584451372899430082;
inline constexpr double kMeanAfterB = 0.00079936025593174698448;
inline constexpr double kXestVarianceN1000 = 0.0006499999999893732;
inline constexpr double kDefaultDensityAt0p01 = 17.203710761389758;

}  // namespace oracle
