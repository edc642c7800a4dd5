#pragma once

// Reference cost-per-trip tables: rows by hourly rate, columns 1x/2x/3x ridership
// each over the zone's three fleet sizes.

#include <array>
#include <string>
#include <vector>

namespace mt::acceptance {

struct ReferenceTable {
  std::string label;
  std::string zone;
  double first_rate;
  std::vector<std::array<double, 9>> rows;  // rate = first_rate + 5 * row
};

inline const std::vector<ReferenceTable>& reference_tables() {
  static const std::vector<ReferenceTable> tables{
      {"belvedere low rates",
       "belvedere",
       20,
       {{18.14, 24.19, 30.23, 9.51, 12.68, 15.85, 6.39, 8.52, 10.66},
        {22.67, 30.23, 37.79, 11.89, 15.85, 19.82, 7.99, 10.66, 13.32},
        {27.21, 36.28, 45.35, 14.27, 19.02, 23.78, 9.59, 12.79, 15.98},
        {31.74, 42.33, 52.91, 16.65, 22.20, 27.74, 11.19, 14.92, 18.65},
        {36.28, 48.37, 60.47, 19.02, 25.37, 31.71, 12.79, 17.05, 21.31},
        {40.81, 54.42, 68.02, 21.40, 28.54, 35.67, 14.39, 19.18, 23.98},
        {45.35, 60.47, 75.58, 23.78, 31.71, 39.63, 15.98, 21.31, 26.64}}},
      {"west-atlanta low rates",
       "west-atlanta",
       20,
       {{14.61, 17.53, 20.45, 7.14, 8.57, 10.00, 4.81, 5.78, 6.74},
        {18.26, 21.91, 25.56, 8.93, 10.71, 12.50, 6.02, 7.22, 8.43},
        {21.91, 26.29, 30.67, 10.71, 12.86, 15.00, 7.22, 8.67, 10.11},
        {25.56, 30.67, 35.79, 12.50, 15.00, 17.50, 8.43, 10.11, 11.80},
        {29.21, 35.06, 40.90, 14.29, 17.14, 20.00, 9.63, 11.56, 13.48},
        {32.87, 39.44, 46.01, 16.07, 19.29, 22.50, 10.83, 13.00, 15.17},
        {36.52, 43.82, 51.12, 17.86, 21.43, 25.00, 12.04, 14.44, 16.85}}},
      {"belvedere high rates",
       "belvedere",
       55,
       {{49.88, 66.51, 83.14, 26.16, 34.88, 43.60, 17.58, 23.44, 29.30},
        {54.42, 72.56, 90.70, 28.54, 38.05, 47.56, 19.18, 25.57, 31.97},
        {58.95, 78.60, 98.26, 30.91, 41.22, 51.52, 20.78, 27.70, 34.63},
        {63.49, 84.65, 105.81, 33.29, 44.39, 55.49, 22.38, 29.84, 37.30},
        {68.02, 90.70, 113.37, 35.67, 47.56, 59.45, 23.98, 31.97, 39.96},
        {72.56, 96.74, 120.93, 38.05, 50.73, 63.41, 25.57, 34.10, 42.62},
        {77.09, 102.79, 128.49, 40.43, 53.90, 67.38, 27.17, 36.23, 45.29},
        {81.63, 108.84, 136.05, 45.18, 60.24, 75.30, 28.77, 38.36, 47.95},
        {86.16, 114.88, 143.60, 47.56, 63.41, 79.27, 30.37, 40.49, 50.61},
        {90.70, 120.93, 151.16, 50.00, 66.67, 83.33, 31.97, 42.62, 53.28}}},
      {"west-atlanta high rates",
       "west-atlanta",
       55,
       {{40.17, 48.20, 56.24, 19.64, 23.57, 27.50, 13.24, 15.89, 18.54},
        {43.82, 52.58, 61.35, 21.43, 25.71, 30.00, 14.44, 17.33, 20.22},
        {47.47, 56.97, 66.46, 23.21, 27.86, 32.50, 15.65, 18.78, 21.91},
        {51.12, 61.35, 71.57, 25.00, 30.00, 35.00, 16.85, 20.22, 23.59},
        {54.78, 65.73, 76.69, 26.79, 32.14, 37.50, 18.06, 21.67, 25.28},
        {58.43, 70.11, 81.80, 28.57, 34.29, 40.00, 19.26, 23.11, 26.96},
        {62.08, 74.49, 86.91, 30.36, 36.43, 42.50, 20.46, 24.56, 28.65},
        {65.73, 78.88, 92.02, 32.14, 38.57, 45.00, 21.67, 26.00, 30.33},
        {69.38, 83.26, 97.13, 33.93, 40.71, 47.50, 22.87, 27.44, 32.02},
        {73.03, 87.64, 102.25, 35.71, 42.86, 50.00, 24.07, 28.89, 33.70}}},
  };
  return tables;
}

}  // namespace mt::acceptance
