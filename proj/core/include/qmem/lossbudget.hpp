#pragma once

// Participation and seam loss models: per-channel quality limits and totals.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qmem {

enum class ChannelKind { Participation, Seam };
enum class BoundFlag { Exact, LowerBound };

/// One loss channel. For Participation, `weight` is p and `quality` is q; for
/// Seam they are y_seam and g_seam in 1/(Ohm m). A channel without a quality
/// is carried in reports but left out of every total.
struct LossChannel {
  std::string name;
  ChannelKind kind = ChannelKind::Participation;
  double weight = 0.0;
  std::optional<double> quality;
  BoundFlag bound = BoundFlag::Exact;

  static LossChannel participation(std::string name, double p, double q, BoundFlag bound = BoundFlag::Exact);
  static LossChannel seam(std::string name, double y_seam, double g_seam, BoundFlag bound = BoundFlag::Exact);

  /// Throws DomainError unless p in (0, 1] (or y > 0) and q, g > 0.
  void validate() const;
};

struct QLimit {
  double value = 0.0;
  BoundFlag bound = BoundFlag::Exact;
};

/// q/p or g/y; a lower-bound quality gives a lower-bound limit.
QLimit channel_q_limit(const LossChannel& channel);

/// Reciprocal of the summed reciprocal limits. Lower-bound channels enter with
/// their bound, and any such channel flags the total as a lower bound.
QLimit total_q(const std::vector<LossChannel>& channels);

struct LossBudget {
  std::vector<LossChannel> channels;
  /// Empty for channels without a quality.
  std::vector<std::optional<QLimit>> per_channel;
  QLimit total;
  /// Total over exact channels only; lower-bound channels are taken as lossless.
  double optimistic_total = 0.0;
  /// Total recomputed from limits rounded to `displayed_digits` significant figures.
  QLimit displayed_total;
  int displayed_digits = 1;
  /// Fraction of the total loss rate per channel (0 for unassigned channels).
  std::vector<double> shares;
  std::vector<double> displayed_shares;
};

/// Throws DomainError on an empty list or an invalid channel.
LossBudget compute_budget(const std::vector<LossChannel>& channels, int displayed_digits = 1);

struct DominantChannel {
  /// Ties are all reported, in list order.
  std::vector<std::string> names;
  double share = 0.0;
};

DominantChannel dominant_channel(const LossBudget& budget, bool displayed_precision = false);

/// g/y: the quality below which the seam starts to matter.
double seam_relevance_q(double y_seam, double g_seam);

/// Round to `digits` significant figures, halves away from zero. A relative
/// slack of 1e-9 absorbs representation error in quotients such as 170/2e-7.
double round_sig(double x, int digits = 1);

std::string_view to_string(BoundFlag bound);
std::string_view to_string(ChannelKind kind);

enum class PackageAlloy { Al6061, Al5N };

/// Storage-mode channels of the seamless stripline package.
std::vector<LossChannel> stripline_storage_channels(PackageAlloy alloy);

/// Storage-mode participations of the three-mode table, paired with the
/// material qualities of the stripline channels. The PTFE clamp has no
/// quality on record and is left unassigned.
std::vector<LossChannel> three_mode_storage_channels(PackageAlloy alloy);

/// Storage mode of the suspended stripline in the seam package.
std::vector<LossChannel> seam_package_storage_channels(PackageAlloy alloy, double g_seam = 1e4);

}  // namespace qmem
