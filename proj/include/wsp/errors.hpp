#ifndef WSP_ERRORS_HPP_
#define WSP_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace wsp {

struct NonPositiveDepth : std::runtime_error {
  explicit NonPositiveDepth(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyCloud : std::runtime_error {
  explicit EmptyCloud(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateScene : std::runtime_error {
  explicit DegenerateScene(const std::string& what) : std::runtime_error(what) {}
};

struct AllInvisible : std::runtime_error {
  explicit AllInvisible(const std::string& what) : std::runtime_error(what) {}
};

struct MissingGroundTruth : std::runtime_error {
  explicit MissingGroundTruth(const std::string& what) : std::runtime_error(what) {}
};

struct ShapeMismatch : std::runtime_error {
  explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct NoVisibleKeypoints : std::runtime_error {
  explicit NoVisibleKeypoints(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyEvalSet : std::runtime_error {
  explicit EmptyEvalSet(const std::string& what) : std::runtime_error(what) {}
};

struct DivergenceDetected : std::runtime_error {
  explicit DivergenceDetected(const std::string& what) : std::runtime_error(what) {}
};

struct CacheMismatch : std::runtime_error {
  explicit CacheMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace wsp

#endif  // WSP_ERRORS_HPP_
