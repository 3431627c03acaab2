#pragma once

// Three-stock cleaning fixture, k = 0.90.
//  AAA: Jan 1-21 without Jan 10 (20 observations, the longest; cut = 18)
//  BBB: Jan 3-21 without Jan 6 (18 observations, exactly at the cut: kept)
//  CCC: even days Jan 2-22 (11 observations: removed, Jan 22 never appears)
// Common start Jan 3; AAA is dragged on Jan 10, BBB on Jan 6.

namespace fixture {

inline constexpr const char* kCleaningRecords =
    "ticker,date,close\n"
    "AAA,2020-01-03,103\n"
    "AAA,2020-01-17,117\n"
    "CCC,2020-01-18,218\n"
    "AAA,2020-01-11,111\n"
    "BBB,2020-01-04,52\n"
    "BBB,2020-01-13,56.5\n"
    "CCC,2020-01-20,220\n"
    "AAA,2020-01-06,106\n"
    "CCC,2020-01-16,216\n"
    "AAA,2020-01-16,116\n"
    "AAA,2020-01-13,113\n"
    "BBB,2020-01-16,58\n"
    "BBB,2020-01-18,59\n"
    "BBB,2020-01-10,55\n"
    "CCC,2020-01-22,222\n"
    "AAA,2020-01-21,121\n"
    "CCC,2020-01-04,204\n"
    "CCC,2020-01-02,202\n"
    "AAA,2020-01-14,114\n"
    "BBB,2020-01-05,52.5\n"
    "BBB,2020-01-21,60.5\n"
    "BBB,2020-01-03,51.5\n"
    "CCC,2020-01-08,208\n"
    "BBB,2020-01-19,59.5\n"
    "BBB,2020-01-17,58.5\n"
    "AAA,2020-01-12,112\n"
    "AAA,2020-01-04,104\n"
    "AAA,2020-01-20,120\n"
    "CCC,2020-01-14,214\n"
    "BBB,2020-01-09,54.5\n"
    "BBB,2020-01-07,53.5\n"
    "AAA,2020-01-19,119\n"
    "CCC,2020-01-10,210\n"
    "AAA,2020-01-01,101\n"
    "BBB,2020-01-11,55.5\n"
    "CCC,2020-01-06,206\n"
    "AAA,2020-01-02,102\n"
    "CCC,2020-01-12,212\n"
    "AAA,2020-01-07,107\n"
    "AAA,2020-01-15,115\n"
    "BBB,2020-01-08,54\n"
    "BBB,2020-01-14,57\n"
    "BBB,2020-01-12,56\n"
    "BBB,2020-01-15,57.5\n"
    "AAA,2020-01-08,108\n"
    "AAA,2020-01-18,118\n"
    "AAA,2020-01-05,105\n"
    "BBB,2020-01-20,60\n"
    "AAA,2020-01-09,109\n";

inline constexpr const char* kCleaningPanel =
    "date,AAA,BBB\n"
    "2020-01-03,103,51.5\n"
    "2020-01-04,104,52\n"
    "2020-01-05,105,52.5\n"
    "2020-01-06,106,52.5\n"
    "2020-01-07,107,53.5\n"
    "2020-01-08,108,54\n"
    "2020-01-09,109,54.5\n"
    "2020-01-10,109,55\n"
    "2020-01-11,111,55.5\n"
    "2020-01-12,112,56\n"
    "2020-01-13,113,56.5\n"
    "2020-01-14,114,57\n"
    "2020-01-15,115,57.5\n"
    "2020-01-16,116,58\n"
    "2020-01-17,117,58.5\n"
    "2020-01-18,118,59\n"
    "2020-01-19,119,59.5\n"
    "2020-01-20,120,60\n"
    "2020-01-21,121,60.5\n";

inline constexpr const char* kCleaningFillMask =
    "date,AAA,BBB\n"
    "2020-01-03,0,0\n"
    "2020-01-04,0,0\n"
    "2020-01-05,0,0\n"
    "2020-01-06,0,1\n"
    "2020-01-07,0,0\n"
    "2020-01-08,0,0\n"
    "2020-01-09,0,0\n"
    "2020-01-10,1,0\n"
    "2020-01-11,0,0\n"
    "2020-01-12,0,0\n"
    "2020-01-13,0,0\n"
    "2020-01-14,0,0\n"
    "2020-01-15,0,0\n"
    "2020-01-16,0,0\n"
    "2020-01-17,0,0\n"
    "2020-01-18,0,0\n"
    "2020-01-19,0,0\n"
    "2020-01-20,0,0\n"
    "2020-01-21,0,0\n";

}  // namespace fixture
