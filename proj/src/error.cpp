#include "facesim/error.hpp"

namespace facesim {

ParseError::ParseError(const std::string& source, std::size_t line, const std::string& what)
    : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

DivergenceError::DivergenceError(std::size_t epoch, std::size_t batch, const std::string& what)
    : Error("diverged at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) +
            ": " + what),
      epoch_(epoch),
      batch_(batch) {}

}  // namespace facesim
