#ifndef LCR_NN_MODEL_IO_HPP_
#define LCR_NN_MODEL_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "lcr/nn/train.hpp"

namespace lcr::nn {

// "UCNN", u32 version, model name, input extents, the layer descriptor
// table, u64 parameter count, then every parameter as a little-endian
// IEEE double in declaration order. History is not part of the file.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string encode_model(const TrainedModel& model);
TrainedModel decode_model(std::string_view bytes, const std::string& origin = "<memory>");

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

// epoch,train_loss,train_acc,val_loss,val_acc
std::string history_csv(const std::vector<EpochRecord>& history);
void write_history_csv(const std::vector<EpochRecord>& history,
                       const std::filesystem::path& path);

}  // namespace lcr::nn

#endif  // LCR_NN_MODEL_IO_HPP_
