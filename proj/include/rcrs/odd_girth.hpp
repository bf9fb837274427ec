#pragma once

#include <stdexcept>
#include <string>

namespace rcrs {

// Length of the shortest odd cycle: a finite odd integer >= 3 or Infinite.
class OddGirth {
 public:
  static OddGirth infinite() { return OddGirth(0); }

  static OddGirth finite(int g) {
    if (g < 3 || g % 2 == 0) {
      throw std::invalid_argument("odd girth must be odd and >= 3, got " + std::to_string(g));
    }
    return OddGirth(g);
  }

  // Accepts "inf", "infinite", "Infinite" or an odd integer.
  static OddGirth parse(const std::string& s) {
    if (s == "inf" || s == "infinite" || s == "Infinite" || s == "INF") return infinite();
    std::size_t pos = 0;
    int g = 0;
    try {
      g = std::stoi(s, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse odd girth '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("cannot parse odd girth '" + s + "'");
    return finite(g);
  }

  bool is_infinite() const { return g_ == 0; }

  int value() const {
    if (is_infinite()) throw std::logic_error("odd girth is infinite");
    return g_;
  }

  std::string to_string() const { return is_infinite() ? "inf" : std::to_string(g_); }

  friend bool operator==(OddGirth a, OddGirth b) { return a.g_ == b.g_; }

  // Orders finite values ascending with Infinite last.
  friend bool operator<(OddGirth a, OddGirth b) {
    if (a.is_infinite()) return false;
    if (b.is_infinite()) return true;
    return a.g_ < b.g_;
  }

 private:
  explicit OddGirth(int g) : g_(g) {}
  int g_;
};

}  // namespace rcrs
