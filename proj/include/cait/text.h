// Small string helpers shared across the toolkit.

#ifndef CAIT_TEXT_H_
#define CAIT_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace cait {

std::vector<std::string> Split(std::string_view s, char sep);
std::string_view Trim(std::string_view s);
std::string AsciiLower(std::string_view s);
std::string Join(const std::vector<std::string>& parts, std::string_view sep);

// True if every byte is ASCII punctuation (and s is non-empty).
bool IsPunctuationOnly(std::string_view s);

// Canonical composition (NFC). Invalid UTF-8 is returned unchanged.
std::string NfcNormalize(std::string_view s);

// Fixed-point rendering, e.g. FormatFixed(0.5, 4) == "0.5000".
std::string FormatFixed(double v, int digits);
// Shortest decimal string that parses back to exactly v.
std::string FormatShortest(double v);

bool ParseInt(std::string_view s, int* out);
bool ParseDouble(std::string_view s, double* out);

}  // namespace cait

#endif  // CAIT_TEXT_H_
