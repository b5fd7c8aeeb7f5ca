package com.acme;

import java.util.Objects;

/** A registered user. */
public class User {
    private final String name;
    private int loginCount;

    public User(String name) {
        this.name = Objects.requireNonNull(name);
    }

    public String getName() {
        return name;
    }

    public int getLoginCount() {
        return loginCount;
    }

    public void recordLogin() {
        loginCount++;
    }

    @Override
    public boolean equals(Object other) {
        return other instanceof User && ((User) other).name.equals(name);
    }
}
