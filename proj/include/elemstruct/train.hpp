#pragma once

// Training loop: shuffled mini-batches, per-step resampling for
// deformation modules, Adam with a step-decay schedule, abort on
// non-finite loss. Fully reproducible from the seed at a fixed thread
// count.

#include <functional>
#include <sstream>

#include "elemstruct/dataset.hpp"
#include "elemstruct/model.hpp"
#include "elemstruct/optim.hpp"

namespace es {

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double learning_rate = 0.0;
};

template <class T>
class Trainer {
 public:
  Trainer(ReconstructionModel<T>& model, TrainConfig cfg)
      : model_(model), cfg_(std::move(cfg)), optimizer_(static_cast<T>(cfg_.learning_rate)) {
    cfg_.validate();
  }

  Adam<T>& optimizer() { return optimizer_; }
  const std::vector<EpochStats>& history() const { return history_; }

  // checkpoint_hook(epoch) is invoked after the scheduled epochs.
  void train(const ShapeDataset& dataset,
             const std::function<void(int)>& checkpoint_hook = nullptr) {
    if (dataset.empty()) throw DataError("train: empty dataset");
    Rng shuffle_rng(cfg_.seed + 0xabcdull);
    const auto milestones = cfg_.milestones();
    double lr = cfg_.learning_rate;
    long step = 0;
    for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
      for (int m : milestones)
        if (epoch == m) lr *= cfg_.lr_decay;
      optimizer_.learning_rate = static_cast<T>(lr);
      std::vector<std::size_t> order(dataset.size());
      std::iota(order.begin(), order.end(), 0);
      for (std::size_t i = order.size() - 1; i > 0; --i)
        std::swap(order[i], order[shuffle_rng.uniform_int(i + 1)]);
      double epoch_loss = 0.0;
      std::size_t batches = 0;
      for (std::size_t begin = 0; begin < order.size();
           begin += static_cast<std::size_t>(cfg_.batch_size)) {
        const std::size_t end =
            std::min(order.size(), begin + static_cast<std::size_t>(cfg_.batch_size));
        std::vector<const PointCloud*> batch;
        for (std::size_t i = begin; i < end; ++i)
          batch.push_back(&dataset.records[order[i]].cloud);
        // one resample per step, shared by the whole batch
        model_.resample(shuffle_rng.next_u64());
        auto fwd = model_.forward_batch(batch, true);
        std::vector<TensorPtr<T>> losses;
        for (std::size_t s = 0; s < batch.size(); ++s)
          losses.push_back(model_.loss(fwd.outputs[s], *batch[s]));
        TensorPtr<T> batch_loss = mean_of(losses);
        const double loss_value = static_cast<double>(batch_loss->scalar());
        if (!std::isfinite(loss_value)) {
          std::ostringstream msg;
          msg << "non-finite loss " << loss_value << " at step " << step << " (epoch " << epoch
              << ", shapes";
          for (std::size_t i = begin; i < end; ++i)
            msg << ' ' << dataset.records[order[i]].id;
          msg << ")";
          throw NumericalError(msg.str());
        }
        model_.params().zero_grad();
        backward(batch_loss);
        optimizer_.step(model_.params());
        epoch_loss += loss_value;
        ++batches;
        ++step;
      }
      history_.push_back({epoch, epoch_loss / static_cast<double>(batches), lr});
      if (checkpoint_hook && cfg_.checkpoint_interval > 0 &&
          (epoch + 1) % cfg_.checkpoint_interval == 0)
        checkpoint_hook(epoch);
    }
  }

  void write_history_csv(const std::string& path) const {
    auto out = io_detail::open_output(path);
    out << "epoch,mean_loss,lr\n";
    for (const auto& row : history_)
      out << row.epoch << ',' << io_detail::fmt9(row.mean_loss) << ','
          << io_detail::fmt9(row.learning_rate) << '\n';
  }

 private:
  static TensorPtr<T> mean_of(const std::vector<TensorPtr<T>>& scalars) {
    if (scalars.size() == 1) return scalars[0];
    bool req = false;
    T acc = 0;
    for (auto& s : scalars) {
      acc += s->scalar();
      req = req || s->requires_grad;
    }
    auto out = Tensor<T>::zeros({1}, req);
    out->values[0] = acc / static_cast<T>(scalars.size());
    if (req) {
      out->parents = scalars;
      const T w = T(1) / static_cast<T>(scalars.size());
      out->backprop = [scalars, w](Tensor<T>& self) {
        for (auto& s : scalars)
          if (s->requires_grad) {
            s->ensure_grad();
            s->grad[0] += self.grad[0] * w;
          }
      };
    }
    return out;
  }

  ReconstructionModel<T>& model_;
  TrainConfig cfg_;
  Adam<T> optimizer_;
  std::vector<EpochStats> history_;
};

}  // namespace es
