/*
   Copyright 2026 The Chainfab Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chainfab/block.hpp"

namespace chainfab {

class CorruptStore : public std::runtime_error {
  public:
    CorruptStore(std::size_t line, const std::string& detail)
        : std::runtime_error("corrupt block store at record " + std::to_string(line) + ": " + detail), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

/// Append-only record of every connected non-genesis block, one canonical
/// block per line.
class BlockJournal {
  public:
    virtual ~BlockJournal() = default;
    virtual std::vector<std::string> load() = 0;
    virtual void append(const Block& block) = 0;
};

class MemoryJournal final : public BlockJournal {
  public:
    std::vector<std::string> load() override { return lines_; }
    void append(const Block& block) override { lines_.push_back(block.encode()); }

    std::vector<std::string>& lines() { return lines_; }

  private:
    std::vector<std::string> lines_;
};

/// <dir>/chain.jsonl. A final line without its newline is a torn write; load()
/// drops it and truncates the file back to the last complete record.
class FileJournal final : public BlockJournal {
  public:
    explicit FileJournal(std::filesystem::path dir);

    std::vector<std::string> load() override;
    void append(const Block& block) override;

    [[nodiscard]] const std::filesystem::path& path() const { return path_; }
    [[nodiscard]] bool dropped_partial_record() const { return dropped_partial_; }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool dropped_partial_ = false;
};

}  // namespace chainfab
