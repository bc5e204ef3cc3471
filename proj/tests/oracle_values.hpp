// Generated by tests/oracles/gen_oracles.py; do not edit.
#pragma once

namespace oracle {

inline constexpr double kGroundL4U3Ne4 = -2.3474265215999246;
inline constexpr double kGapL4U3Ne4 = 0.6468832255156958;
inline constexpr double kGroundL3U2Ne2 = -2.2794523157685957;
inline constexpr double kGfL3U2Re[] = {-0.5305090854021961, -0.10356613001401552, 1.0610181708043933, 0.20713226002803475, -0.5305090854021972, -0.10356613001401911};
inline constexpr double kGfL3U2Im[] = {-6.938893903907228e-18, 0.0, 1.5612511283791264e-17, -1.3877787807814457e-17, 3.903127820947816e-18, 0.0};
inline constexpr double kQuenchSeriesL3U2[] = {0.0, -0.3531849840768787, -0.18215846285458984, 0.13554754914903194, 0.0, 0.7063699681537559, 0.3643169257091771, -0.2710950982980662, 0.0, -0.3531849840768771, -0.18215846285458728, 0.13554754914903422};
inline constexpr double kTrotterL3U2T1N2[] = {-0.4491016129888985, 0.5151778815651231, -0.06607626857622456};
inline constexpr double kTrotterL4U3T1N3[] = {-0.011031642315317218, 0.07158815941952042, 0.47056202386584867, -0.5311185409700518};
inline constexpr int kQsfNmax = 60;
inline constexpr int kQsfPickRow[] = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 3, 3, 4, 4, 4, 4, 4};
inline constexpr int kQsfPickCol[] = {0, 30, 60, 67, 120, 0, 30, 60, 67, 120, 0, 30, 60, 67, 120, 0, 30, 60, 67, 120, 0, 30, 60, 67, 120};
inline constexpr double kQsfPickValue[] = {0.03860767405881831, 0.039998960417308445, 0.285457633920536, 0.0074421638970400905, 0.03860767405881832, 0.04889596210853924, 0.051150630846133964, 0.3655854895822889, 0.03160154325634151, 0.04889596210853925, 0.10157620470195815, 0.24350544957114614, 0.8477254564213993, 0.9941535627900959, 0.10157620470195818, 0.10157620470195815, 0.24350544957114614, 0.8477254564213993, 0.9941535627900959, 0.10157620470195819, 0.04889596210853925, 0.051150630846133985, 0.3655854895822889, 0.03160154325634151, 0.04889596210853927};

}  // namespace oracle
