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

#include "chainfab/journal.hpp"

#include <sstream>

namespace chainfab {

FileJournal::FileJournal(std::filesystem::path dir) : path_(std::move(dir) / "chain.jsonl") {
    std::filesystem::create_directories(path_.parent_path());
}

std::vector<std::string> FileJournal::load() {
    out_.close();
    std::vector<std::string> lines;
    if (std::filesystem::exists(path_)) {
        std::string content;
        {
            std::ifstream in(path_, std::ios::binary);
            if (!in) throw std::runtime_error("cannot read " + path_.string());
            std::ostringstream buf;
            buf << in.rdbuf();
            content = buf.str();
        }
        std::size_t complete = content.rfind('\n');
        complete = complete == std::string::npos ? 0 : complete + 1;
        if (complete < content.size()) {
            dropped_partial_ = true;
            std::filesystem::resize_file(path_, complete);
        }
        std::size_t pos = 0;
        while (pos < complete) {
            auto nl = content.find('\n', pos);
            lines.push_back(content.substr(pos, nl - pos));
            pos = nl + 1;
        }
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw std::runtime_error("cannot open " + path_.string() + " for append");
    return lines;
}

void FileJournal::append(const Block& block) {
    if (!out_.is_open()) {
        out_.open(path_, std::ios::binary | std::ios::app);
        if (!out_) throw std::runtime_error("cannot open " + path_.string() + " for append");
    }
    out_ << block.encode() << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
}

}  // namespace chainfab
