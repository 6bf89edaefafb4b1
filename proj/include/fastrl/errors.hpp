#pragma once

#include <stdexcept>
#include <string>

namespace fastrl {

// Base class for all library errors. Specific conditions get their own type
// so callers can catch exactly what they expect.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FASTRL_DEFINE_ERROR(Name)                            \
  class Name : public Error {                                \
   public:                                                   \
    explicit Name(const std::string& msg) : Error(msg) {}    \
  }

// sim
FASTRL_DEFINE_ERROR(NonClosedTrack);
FASTRL_DEFINE_ERROR(PlacementFailure);
FASTRL_DEFINE_ERROR(SteppedDoneEpisode);
FASTRL_DEFINE_ERROR(DegenerateSpeedRange);

// embed
FASTRL_DEFINE_ERROR(ShapeMismatch);
FASTRL_DEFINE_ERROR(EmptyDataset);
FASTRL_DEFINE_ERROR(DivergedTraining);
FASTRL_DEFINE_ERROR(EmptyDescription);
FASTRL_DEFINE_ERROR(ZeroVector);
FASTRL_DEFINE_ERROR(TooFewFrames);

// sac
FASTRL_DEFINE_ERROR(FrozenPolicy);
FASTRL_DEFINE_ERROR(NonFiniteLoss);

// repo
FASTRL_DEFINE_ERROR(DuplicateName);
FASTRL_DEFINE_ERROR(UnfrozenPolicy);
FASTRL_DEFINE_ERROR(EpisodeTooShort);
FASTRL_DEFINE_ERROR(VersionMismatch);
FASTRL_DEFINE_ERROR(CorruptFile);

// transfer
FASTRL_DEFINE_ERROR(ModeMismatch);
FASTRL_DEFINE_ERROR(IncompatibleRepository);
FASTRL_DEFINE_ERROR(EmptyLog);

// io / cli
FASTRL_DEFINE_ERROR(IoFailure);
FASTRL_DEFINE_ERROR(ConfigError);

#undef FASTRL_DEFINE_ERROR

}  // namespace fastrl
