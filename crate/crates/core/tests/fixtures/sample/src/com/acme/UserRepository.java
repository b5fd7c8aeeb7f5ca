package com.acme;

import java.util.HashMap;
import java.util.Map;
import java.util.Optional;

public interface UserStore {
    Optional<User> findByName(String name);
}

class UserRepository implements UserStore {
    private final Map<String, User> usersByName = new HashMap<>();

    @Override
    public Optional<User> findByName(String name) {
        return Optional.ofNullable(usersByName.get(name));
    }

    public void save(User user) {
        usersByName.put(user.getName(), user);
    }

    public boolean isEmpty() {
        return usersByName.isEmpty();
    }

    static class Stats {
        private int hits;

        int countHits() {
            return hits;
        }
    }
}
